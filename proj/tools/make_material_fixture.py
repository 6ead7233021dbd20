#!/usr/bin/env python3
"""Writes the synthetic 12-material fixture under data/materials.

The spectra are illustrative stand-ins shaped like absorbance (UV-Vis) and
transmittance (FT/IR) curves; they are not measurements. The elasticity and
moisture classes follow the published three-class listings.
"""
import argparse
import math
import random
import re
from pathlib import Path

# name, elasticity, moisture
CLASSES = [
    ("Silicone", "High", "High"),
    ("Monster Liquid Latex", "High", "Medium"),
    ("Play Doh", "Medium", "High"),
    ("2D Paper", "Low", "Low"),
    ("Wood Glue", "High", "Medium"),
    ("Gold Fingers", "Low", "Medium"),
    ("Gelatin", "High", "Medium"),
    ("Dragon Skin", "High", "High"),
    ("Latex Body Paint", "Medium", "Low"),
    ("Transparency", "Low", "Low"),
    ("Conductive Ink on Paper", "Low", "Low"),
    ("3D Universal Targets", "Medium", "Medium"),
]

# Materials sharing a chemistry share a spectral family.
FAMILY = {
    "Silicone": 0, "Dragon Skin": 0,
    "Monster Liquid Latex": 1, "Latex Body Paint": 1,
    "Play Doh": 2, "Gelatin": 2, "Wood Glue": 2,
    "2D Paper": 3, "Conductive Ink on Paper": 3, "Transparency": 3,
    "Gold Fingers": 4, "3D Universal Targets": 4,
}


def slug(name):
    return re.sub(r"[^a-z0-9]", "_", name.lower())


def bumps(rng, lo, hi, count):
    return [(rng.uniform(lo, hi), rng.uniform(0.2, 1.0), rng.uniform(0.03, 0.12) * (hi - lo)) for _ in range(count)]


def curve(x, base, slope, peaks, lo, hi):
    t = (x - lo) / (hi - lo)
    return base + slope * t + sum(a * math.exp(-0.5 * ((x - c) / w) ** 2) for c, a, w in peaks)


def write_curve(path, xs, ys):
    with open(path, "w", newline="\n") as f:
        f.write("abscissa,value\n")
        for x, y in zip(xs, ys):
            f.write(f"{x:.3f},{y:.6f}\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "materials"))
    ap.add_argument("--seed", type=int, default=2019)
    args = ap.parse_args()
    out = Path(args.out)
    (out / "uvvis").mkdir(parents=True, exist_ok=True)
    (out / "ftir").mkdir(parents=True, exist_ok=True)

    rng = random.Random(args.seed)
    families = {}
    for fam in sorted(set(FAMILY.values())):
        families[fam] = (bumps(rng, 220, 780, 3), bumps(rng, 255, 370, 3))

    with open(out / "classes.csv", "w", newline="\n") as f:
        f.write("name,elasticity,moisture\n")
        for name, el, mo in CLASSES:
            f.write(f"{name},{el},{mo}\n")

    for i, (name, _, _) in enumerate(CLASSES):
        uv_family, ir_family = families[FAMILY[name]]
        uv_peaks = [(c + rng.gauss(0, 15), a * rng.uniform(0.7, 1.3), w) for c, a, w in uv_family]
        uv_peaks += bumps(rng, 220, 780, 1)
        ir_peaks = [(c + rng.gauss(0, 4), a * rng.uniform(0.7, 1.3), w) for c, a, w in ir_family]
        ir_peaks += bumps(rng, 255, 370, 1)
        # Instruments sample on slightly different grids per material.
        uv_lo, uv_step = 200 - (i % 3) * 5, 2.0 + 0.5 * (i % 2)
        uv_x = [uv_lo + k * uv_step for k in range(int((800 + (i % 4) * 5 - uv_lo) / uv_step) + 1)]
        uv_base, uv_slope = rng.uniform(0.1, 0.5), -rng.uniform(0.0, 0.3)
        write_curve(out / "uvvis" / f"{slug(name)}.csv", uv_x,
                    [curve(x, uv_base, uv_slope, uv_peaks, 200, 800) + rng.gauss(0, 0.005) for x in uv_x])
        ir_lo, ir_step = 250 + (i % 3) * 2, 0.5 + 0.25 * (i % 2)
        ir_x = [ir_lo + k * ir_step for k in range(int((375 - ir_lo) / ir_step) + 1)]
        ir_base, ir_slope = rng.uniform(5, 20), rng.uniform(-5, 5)
        write_curve(out / "ftir" / f"{slug(name)}.csv", ir_x,
                    [curve(x, ir_base, ir_slope, [(c, 30 * a, w) for c, a, w in ir_peaks], 250, 375)
                     + rng.gauss(0, 0.2) for x in ir_x])


if __name__ == "__main__":
    main()
