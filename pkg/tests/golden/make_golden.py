"""Regenerate the golden trace used by the CSV schema tests."""

import math
from pathlib import Path

from vsa_lab.config import Config
from vsa_lab.control import AngleTarget
from vsa_lab.experiments import simulate
from vsa_lab.output import write_trace_csv


def golden_trace():
    cfg = Config()
    plant = cfg.build_plant()
    ramp = lambda t: AngleTarget(math.pi / 2, 2.0 * t)
    return simulate(plant, cfg.build_controller(), ramp, 0.05, plant.state_at_pivot(0.030),
                    "short_ramp")


if __name__ == "__main__":
    write_trace_csv(golden_trace(), Path(__file__).with_name("short_ramp.csv"))
