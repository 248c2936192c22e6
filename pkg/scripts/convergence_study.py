"""Run a convergence manifest and print the median trend per n.

    python scripts/convergence_study.py scripts/manifests/convergence_m1.yaml --threads 4
"""
import argparse
import json

from randeriv.experiments import ExperimentManifest, run_convergence, write_outputs


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("manifest")
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--output-dir", default=None)
    args = ap.parse_args()
    man = ExperimentManifest.load(args.manifest)
    series = run_convergence(man, threads=args.threads)
    paths = write_outputs(man, series, args.output_dir)
    info = json.loads(paths["summary_json"].read_text())
    print(f"tasks: {info['total_tasks']}, failures per n: {info['failures']}")
    for metric, t in info["trend"].items():
        print(f"{metric}: fitted C = {t['fitted_C']:.4g}, non-increasing = {t['non_increasing']}")
        for n, v in t["medians"].items():
            print(f"  n={n:>5}  median={v:.5g}  within C log n / n: {t['within_C_log_n_over_n'][n]}")
    print(f"outputs in {paths['metrics'].parent}")


if __name__ == "__main__":
    main()
