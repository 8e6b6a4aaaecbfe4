#!/usr/bin/env python3
"""Render every bundled example config into an output directory.

Usage: python3 scripts/render_examples.py [--out-dir DIR] [--workers N] [--fast]

--fast drops image sizes to 96x96 and volume grids to 33^3 so the whole
set finishes in seconds; omit it to reproduce the configs as written.
"""

import argparse
import os
import time
from dataclasses import replace
from pathlib import Path

from qjulia import field, oracle2d, render
from qjulia.cli import _complex_section
from qjulia.config import parse_config
from qjulia.field import Region3

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

EXAMPLES = [
    "quadratic_basilica.json",
    "newton_cubic_escape.json",
    "newton_cubic_cutoff.json",
    "interweaving_basins.json",
]


def shrink(cfg):
    region = Region3(cfg.region.min, cfg.region.max, (33, 33, 33))
    camera = replace(cfg.camera, image_size=(96, 96))
    return replace(cfg, region=region, camera=camera)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out-dir", default="renders")
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--fast", action="store_true")
    args = ap.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    for name in EXAMPLES:
        cfg = parse_config((CONFIG_DIR / name).read_text())
        if args.fast:
            cfg = shrink(cfg)
        F = cfg.map.build()
        t0 = time.perf_counter()
        image = render.render_image(
            F,
            cfg.region,
            cfg.embedding,
            cfg.params,
            cfg.camera,
            cfg.lighting,
            k_refine=cfg.k_refine,
            workers=args.workers,
            palette=cfg.palette,
        )
        out = out_dir / Path(cfg.output_path).name
        render.write_ppm(out, image)
        dt = time.perf_counter() - t0
        print(f"{name}: {out} ({dt:.1f}s)")

        if F.is_real:
            window = cfg.slice_window or (
                cfg.region.min[0], cfg.region.max[0],
                cfg.region.min[1], cfg.region.max[1],
            )
            resolution = cfg.slice_resolution or (
                cfg.region.resolution[0], cfg.region.resolution[1],
            )
            bits = oracle2d.render_slice2d(
                _complex_section(F), window, resolution, cfg.params
            )
            pgm = out.with_suffix(".pgm")
            oracle2d.write_pgm(pgm, bits)
            print(f"{name}: {pgm} (complex cross-section)")

        fld = field.scan(F, cfg.region, cfg.embedding, cfg.params, workers=args.workers)
        counts = {k.name.lower(): v for k, v in fld.counts().items() if v}
        print(f"{name}: plotted {fld.fraction_plotted():.4f}, outcomes {counts}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
