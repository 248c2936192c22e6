"""Emit scatter SVGs and point CSVs for the four figure manifests.

    python scripts/make_figures.py [--output-dir out/figures]
"""
import argparse
from pathlib import Path

from randeriv.experiments import ExperimentManifest, run_figures

HERE = Path(__file__).resolve().parent
MANIFESTS = ["fig1_flat_m3.json", "fig2_flat_m50.json", "fig3_circular_m1.yaml", "fig4_circular_m20.yaml"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--output-dir", default="out/figures")
    args = ap.parse_args()
    for name in MANIFESTS:
        man = ExperimentManifest.load(HERE / "manifests" / name)
        out = Path(args.output_dir) / Path(name).stem
        for p in run_figures(man, out):
            print(p)


if __name__ == "__main__":
    main()
