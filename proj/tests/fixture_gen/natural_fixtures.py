"""Writes the natural-image PNG fixtures from scikit-image sample data
(astronaut, rocket: public domain; coffee, chelsea: CC0; camera: no known
copyright restrictions)."""

import pathlib
import sys

import numpy as np
from PIL import Image
from skimage import data

OUT = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures/natural")
SIZE = 128

SOURCES = {
    "astronaut": lambda: data.astronaut()[40:360, 100:420],
    "coffee": lambda: data.coffee()[60:380, 140:460],
    "chelsea": lambda: data.chelsea()[0:300, 60:360],
    "camera": lambda: data.camera()[40:360, 120:440],
}


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    for name, load in SOURCES.items():
        arr = np.ascontiguousarray(load())
        img = Image.fromarray(arr).resize((SIZE, SIZE), Image.Resampling.BOX)
        img.save(OUT / f"{name}.png", optimize=True)
        print(OUT / f"{name}.png", img.mode, img.size)


if __name__ == "__main__":
    main()
