#!/usr/bin/env python3
import subprocess, sys
from pathlib import Path

R = "python -m src.experiments.runner"


def run(desc, cmd):
    print(f"\n=== {desc} ===\n{cmd}")
    r = subprocess.run(cmd, shell=True)
    if r.returncode != 0:
        sys.exit(r.returncode)


def main():
    for d in ("results/traces", "results/models", "results/reports"):
        Path(d).mkdir(parents=True, exist_ok=True)

    for cat in ("mail", "web", "database", "file"):
        run(f"Generate {cat}", f"{R} gen --category {cat} -n 20000 --seed 1 --out results/traces/{cat}.csv")
    run("Generate workload change", f"{R} gen --concat file web -n 25000 --seed 2 --out results/traces/file_web.csv")

    traces = " ".join(f"results/traces/{c}.csv" for c in ("mail", "web", "database", "file"))
    run("Characterizer", f"{R} train --kind characterizer --trace {traces} --epochs 20 --lr 0.01 "
                         f"--out results/models/characterizer.npz")
    run("Characterizer vs baselines", f"{R} train --kind baseline --method all --trace {traces} --epochs 20 --lr 0.01")

    for cat, name in (("file", "FileServer"), ("web", "WebServer")):
        run(f"Label {cat}", f"{R} label --trace results/traces/{cat}.csv --out results/traces/{cat}.labeled.csv")
        run(f"Cache model {cat}", f"{R} train --kind cache-model --labeled results/traces/{cat}.labeled.csv "
                                  f"--epochs 15 --hidden 64 --layers 2 --lr 0.005 --out results/models/{cat}.npz")

    run("Compare (web)", f"{R} compare --trace results/traces/web.csv "
                         f"--policies lru larc access belady oracle-benefit rcrnn "
                         f"--set models.cache=results/models/web.npz --out results/reports/web")
    run("Reconfiguration", f"{R} compare --trace results/traces/file_web.csv --policies lru belady rcrnn "
                           f"--set models.characterizer=results/models/characterizer.npz "
                           f"--set models.cache.FileServer=results/models/file.npz "
                           f"--set models.cache.WebServer=results/models/web.npz --out results/reports/file_web")
    run("Plots", f"{R} report results/reports/web results/reports/file_web --save results/plots")


if __name__ == "__main__":
    main()
