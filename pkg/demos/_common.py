import os
from pathlib import Path


def out_dir(name):
    """Demo output folder under $VSA_LAB_OUT (or ./demo_out)."""
    path = Path(os.environ.get("VSA_LAB_OUT", "demo_out")) / name
    path.mkdir(parents=True, exist_ok=True)
    return path
