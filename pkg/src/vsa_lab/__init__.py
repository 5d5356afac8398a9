"""Simulation library for a two-motor variable stiffness actuator.

Submodules: ``vsm`` (lever mechanism laws), ``dtm`` (differential gear
train), ``plant`` (time-stepped actuator), ``control`` (cascade PI),
``experiments`` (bench scenarios), ``config``/``output``/``cli`` (I/O).
"""

from .config import Config, load_config
from .control import AngleTarget, CascadeController, Command, ControllerGains, MixMode
from .dtm import DtmParams
from .errors import (ConfigError, DeflectionLimitError, DomainError, InfeasibleCommandError,
                     IntegrationError)
from .plant import ActuatorState, FrictionModel, LoadModel, MotorModel, Plant
from .vsm import VsmParams

__version__ = "0.1.0"

__all__ = [
    "ActuatorState", "AngleTarget", "CascadeController", "Command", "Config", "ConfigError",
    "ControllerGains", "DeflectionLimitError", "DomainError", "DtmParams",
    "FrictionModel", "InfeasibleCommandError", "IntegrationError", "LoadModel", "MixMode",
    "MotorModel", "Plant", "VsmParams", "load_config",
]
