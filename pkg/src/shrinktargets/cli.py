"""Experiment runner CLI.

``run <config.json>`` executes one experiment preset and writes a JSON run
record plus CSV tables into a timestamp-free, config-keyed directory so
reruns are byte-comparable.  ``report <run-dir>...`` merges run records
into one summary table and renders overview figures next to it.

The default output root is ./runs, overridable by --out or the
SHRINKTARGETS_OUT environment variable.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

from . import __version__
from .errors import ConfigInvalid
from .experiments import run_experiment, validate

ENV_OUT = "SHRINKTARGETS_OUT"


def _out_root(args):
    if args.out:
        return args.out
    return os.environ.get(ENV_OUT, "runs")


def _config_hash(cfg):
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(str(c) for c in row) + "\n")


_CSV_HEADERS = {
    "traces": "scheme,seed,x_id,N,re,im,reference_re,reference_im",
    "quantiles": "N,mode,q50,q90,q99,max,trials,seed",
    "slopes": "seed,slope",
    "symm_diff": "seed,counts...",
    "cov_decay": "m,cov",
}


def cmd_run(args):
    with open(args.config) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict) or "theorem" not in cfg:
        raise ConfigInvalid("config must be a JSON object with a 'theorem' key")
    theorem = cfg["theorem"]
    params = dict(cfg.get("params", {}))
    if args.seed is not None:
        params["master_seed"] = args.seed
    if args.tol is not None:
        params["tol"] = args.tol
    validate(theorem, params)

    run_id = f"{theorem}-{_config_hash({'theorem': theorem, 'params': params})}"
    out_dir = os.path.join(_out_root(args), run_id)
    os.makedirs(out_dir, exist_ok=True)

    t0 = time.time()
    result = run_experiment(theorem, params, workers=args.workers)
    wall = time.time() - t0

    for name, rows in result.get("csv", {}).items():
        header = _CSV_HEADERS.get(name, "")
        _write_csv(os.path.join(out_dir, f"{name}.csv"), header, rows)

    record = {
        "run_id": run_id,
        "theorem": theorem,
        "params": {k: str(v) for k, v in params.items()},
        "config_hash": _config_hash({"theorem": theorem, "params": params}),
        "version": __version__,
        "assertions": result["assertions"],
        "undecided": sum(t.get("undecided", 0) for t in result["trials"]
                         if isinstance(t, dict)),
        "wall_time_s": round(wall, 3),
    }
    with open(os.path.join(out_dir, "record.json"), "w") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)

    ok = all(a["passed"] for a in result["assertions"])
    for a in result["assertions"]:
        status = "PASS" if a["passed"] else "FAIL"
        print(f"[{status}] {a['name']}: {a['detail']}")
    print(f"run record: {os.path.join(out_dir, 'record.json')}")
    return 0 if ok else 1


def _load_records(run_dirs):
    records = []
    for root in run_dirs:
        for dirpath, _, files in os.walk(root):
            if "record.json" in files:
                with open(os.path.join(dirpath, "record.json")) as fh:
                    rec = json.load(fh)
                rec["_dir"] = dirpath
                records.append(rec)
    records.sort(key=lambda r: (r["theorem"], r["config_hash"], r["run_id"]))
    return records


def _render_figures(records, out_dir):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    made = []
    for rec in records:
        trace_path = os.path.join(rec["_dir"], "traces.csv")
        if os.path.exists(trace_path):
            data = {}
            with open(trace_path) as fh:
                next(fh)
                for line in fh:
                    parts = line.rstrip("\n").split(",")
                    scheme, seed, x_id, N, re_, im_ = parts[:6]
                    key = (seed, x_id)
                    data.setdefault(key, []).append(
                        (int(N), abs(complex(float(re_), float(im_)))))
            fig, ax = plt.subplots(figsize=(6, 4))
            for key, pts in list(data.items())[:40]:
                pts.sort()
                ax.plot([p[0] for p in pts], [p[1] for p in pts],
                        alpha=0.4, lw=0.8)
            ax.set_xscale("log")
            ax.set_xlabel("N")
            ax.set_ylabel("|average|")
            ax.set_title(rec["run_id"])
            fname = os.path.join(out_dir, f"{rec['run_id']}-traces.png")
            fig.savefig(fname, dpi=120, bbox_inches="tight")
            plt.close(fig)
            made.append(fname)
        quant_path = os.path.join(rec["_dir"], "quantiles.csv")
        if os.path.exists(quant_path):
            rows = []
            with open(quant_path) as fh:
                next(fh)
                for line in fh:
                    p = line.rstrip("\n").split(",")
                    rows.append((p[1], int(p[0]), float(p[2]), float(p[3]),
                                 float(p[4])))
            fig, ax = plt.subplots(figsize=(6, 4))
            modes = sorted({r[0] for r in rows})
            for mode in modes:
                sub = sorted(r for r in rows if r[0] == mode)
                ax.plot([r[1] for r in sub], [r[4] for r in sub],
                        marker="o", label=f"{mode} q99")
            ax.set_xscale("log", base=2)
            ax.set_xlabel("N")
            ax.set_ylabel("normalized sup quantile")
            ax.legend(fontsize=7)
            ax.set_title(rec["run_id"])
            fname = os.path.join(out_dir, f"{rec['run_id']}-quantiles.png")
            fig.savefig(fname, dpi=120, bbox_inches="tight")
            plt.close(fig)
            made.append(fname)
    return made


def cmd_report(args):
    records = _load_records(args.run_dirs)
    if not records:
        print("no run records found", file=sys.stderr)
        return 1
    out_dir = _out_root(args)
    os.makedirs(out_dir, exist_ok=True)
    versions = {r["version"] for r in records}
    warning = "" if len(versions) == 1 else f"mixed code versions: {sorted(versions)}"

    rows = []
    for rec in records:
        for a in rec["assertions"]:
            rows.append((rec["theorem"], rec["config_hash"], rec["run_id"],
                         a["name"], "pass" if a["passed"] else "fail",
                         a["detail"].replace(",", ";")))
    _write_csv(os.path.join(out_dir, "summary.csv"),
               "theorem,config_hash,run_id,assertion,status,detail", rows)
    summary = {
        "records": [{k: v for k, v in rec.items() if k != "_dir"}
                    for rec in records],
        "warning": warning,
    }
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    figures = _render_figures(records, out_dir)
    print(f"summary: {os.path.join(out_dir, 'summary.csv')}")
    for f in figures:
        print(f"figure: {f}")
    if warning:
        print(f"warning: {warning}", file=sys.stderr)
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="shrinktargets",
        description="shrinking-target ergodic-average experiment runner")
    parser.add_argument("--seed", type=int, default=None,
                        help="master seed override")
    parser.add_argument("--workers", type=int, default=1,
                        help="parallel worker count")
    parser.add_argument("--out", default=None,
                        help=f"output root (default $'{ENV_OUT}' or ./runs)")
    parser.add_argument("--tol", type=float, default=None,
                        help="tolerance override")
    sub = parser.add_subparsers(dest="cmd", required=True)
    p_run = sub.add_parser("run", help="execute one experiment config")
    p_run.add_argument("config")
    p_rep = sub.add_parser("report", help="merge run records into a summary")
    p_rep.add_argument("run_dirs", nargs="+")
    args = parser.parse_args(argv)
    try:
        if args.cmd == "run":
            return cmd_run(args)
        return cmd_report(args)
    except ConfigInvalid as exc:
        print(f"config invalid: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
