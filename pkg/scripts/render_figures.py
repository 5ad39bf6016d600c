#!/usr/bin/env python3
"""Render the gasket, the twisted gasket and a gasket measure into out/."""

import argparse
from pathlib import Path

from fractlang.fractal import Interpretation, solve
from fractlang.lts import unfold, unfold_prob
from fractlang.measure import sample_measure
from fractlang.render import RenderConfig, render_measure, render_set, write_image
from fractlang.terms import parse_pterm, parse_term

ROOT = Path(__file__).resolve().parent.parent
FIX = ROOT / "fixtures"


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out", help="output directory (default: out)")
    ap.add_argument("--depth", type=int, default=9)
    ap.add_argument("--size", type=int, default=512)
    ap.add_argument("--samples", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sigma = Interpretation.load(FIX / "gasket.interp")
    cfg = RenderConfig(args.size, args.size, (0.0, 0.0, 1.0, 0.8660254037844386))

    for name in ("gasket", "twisted"):
        lts = unfold(parse_term((FIX / f"{name}.term").read_text()))
        sv = solve(lts, sigma, args.depth)
        write_image(render_set(sv[0], cfg), out / f"{name}.ppm")
        print(f"{name}.ppm: {len(sv[0])} points, within {sv[0].guarantee:.2e} of the attractor")

    m = unfold_prob(parse_pterm("mu v. (a.v +[1/2] (b.v +[1/2] c.v))"))
    pts = sample_measure(m, 0, sigma, 30, args.samples, args.seed)
    write_image(render_measure(pts, cfg), out / "gasket_measure.pgm")
    print(f"gasket_measure.pgm: {args.samples} samples")


if __name__ == "__main__":
    main()
