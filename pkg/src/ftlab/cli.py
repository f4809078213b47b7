"""Command-line front end and content-addressed run registry.

Every subcommand that produces data writes into a registry directory
(the --out flag, else $FTLAB_REGISTRY, else ./runs). Entries are keyed
by a digest over everything that determines the result: backend tag,
normalized config, circuit selection, suite hash, and package version.
Rerunning an identical request finds the existing entry and leaves it
alone; the registry only ever grows.

Exit codes: 0 success, 2 validation error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import shutil
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from datetime import datetime, timezone

from . import __version__
from .analysis import apply_readout_error, build_report, evaluate_circuit, import_counts
from .circuits import SELECTED_15, SUITE_SHA256, load_suite, lower_bare, lower_encoded
from .errors import (
    CompileError,
    ConfigError,
    DataIntegrityError,
    DomainError,
    NumericsError,
    ParseError,
    PostselectionError,
)
from .spinbath import SpinBathConfig, circuit_duration, estimate_t2
from .spinbath import run_circuit as run_spinbath
from .statevector import Distribution, run_ideal
from .transmon import (
    PulseLibrary,
    build_basis,
    dressed_qubit_freq,
    load_device,
    load_pulse_library,
    optimize_pulse,
    reduce_device,
)
from .transmon import run_circuit as run_transmon

_VALIDATION_ERRORS = (ConfigError, ParseError, DataIntegrityError, DomainError, CompileError)
_NUMERIC_ERRORS = (NumericsError, PostselectionError)


# ----------------------------------------------------------------- registry


def _canonical(doc) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _digest(doc) -> str:
    return hashlib.sha256(_canonical(doc).encode("utf-8")).hexdigest()[:16]


def _registry_root(out: str | None) -> str:
    return out or os.environ.get("FTLAB_REGISTRY") or "runs"


def _write_entry(root: str, run_id: str, core: dict, files: dict) -> str:
    """Materialize one registry entry; never touches an existing one.

    Files are staged in a sibling directory and renamed into place so a
    crashed run cannot leave a half-written entry under its digest.
    """
    run_dir = os.path.join(root, run_id)
    stage = run_dir + ".tmp"
    os.makedirs(stage, exist_ok=True)
    for name, text in files.items():
        with open(os.path.join(stage, name), "w", encoding="utf-8") as fh:
            fh.write(text)
    manifest = {
        "run_id": run_id,
        "created": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
        "digest_fields": core,
        "outputs": sorted(files),
    }
    with open(os.path.join(stage, "manifest.json"), "w", encoding="utf-8") as fh:
        fh.write(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    try:
        os.replace(stage, run_dir)
    except OSError:
        # lost a race with an identical run; the existing entry wins
        shutil.rmtree(stage, ignore_errors=True)
    return run_dir


def _existing_entry(root: str, run_id: str) -> str | None:
    run_dir = os.path.join(root, run_id)
    if os.path.isfile(os.path.join(run_dir, "manifest.json")):
        return run_dir
    return None


def _load_json_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path} must hold a JSON object")
    return doc


# ------------------------------------------------------------------ backends


def _parse_circuits(selector: str, suite):
    if selector == "all":
        return list(suite)
    if selector == "selected15":
        return [suite[i] for i in SELECTED_15]
    try:
        ids = sorted({int(tok) for tok in selector.split(",") if tok.strip()})
    except ValueError:
        raise ConfigError(
            f"--circuits must be 'all', 'selected15', or comma-separated ids, got {selector!r}"
        ) from None
    if not ids:
        raise ConfigError("empty circuit selection")
    for i in ids:
        if not 0 <= i < len(suite):
            raise ConfigError(f"unknown circuit id {i}")
    return [suite[i] for i in ids]


def _transmon_model(gate_set: str):
    """Two-transmon sub-device for bare runs, pulses recarried to it.

    Library frequencies target the full chip; the reduced model's dressed
    splittings sit a few MHz away, so every pulse gets the local values.
    """
    dev = load_device()
    red = reduce_device(dev, (3, 4), (4,))
    bas = build_basis(red)
    base = load_pulse_library(gate_set)
    f3 = dressed_qubit_freq(red, bas, 3)
    f4 = dressed_qubit_freq(red, bas, 4)
    lib = PulseLibrary(
        name=f"{gate_set}-q3q4",
        xpih={
            3: replace(base.xpih_pulse(3), freq=f3),
            4: replace(base.xpih_pulse(4), freq=f4),
        },
        cnot={(3, 4): replace(base.cnot_params(3, 4), f_c=f3, f_t=f4)},
    )
    return red, bas, lib


def _make_runner(backend: str, config_doc: dict | None, mode: str):
    """Return (run(pc) -> (Distribution, meta), normalized config doc)."""
    if backend == "ideal":
        if config_doc:
            raise ConfigError("ideal backend takes no config")

        def run(pc):
            return run_ideal(pc), {}

        return run, {}

    if backend == "spinbath":
        if config_doc is None:
            raise ConfigError("spinbath backend needs --config")
        cfg = SpinBathConfig.from_dict(config_doc)

        def run(pc):
            return run_spinbath(cfg, pc), {"duration_ns": circuit_duration(pc)}

        return run, cfg.to_dict()

    if backend == "transmon":
        if mode != "bare":
            raise ConfigError(
                "transmon backend runs bare circuits only; use --mode bare"
            )
        doc = dict(config_doc or {})
        gate_set = doc.pop("gate_set", "plain")
        tau = doc.pop("tau", 0.001)
        if doc:
            raise ConfigError(f"unknown transmon config keys: {sorted(doc)}")
        if gate_set not in ("plain", "withf"):
            raise ConfigError(f"gate_set must be 'plain' or 'withf', got {gate_set!r}")
        if not (isinstance(tau, (int, float)) and 0.0 < tau <= 0.1):
            raise ConfigError(f"tau must be in (0, 0.1], got {tau!r}")
        red, bas, lib = _transmon_model(gate_set)

        def run(pc):
            dist, leak = run_transmon(red, bas, lib, pc, tau=float(tau))
            return dist, {"leakage": leak}

        return run, {"gate_set": gate_set, "tau": float(tau)}

    raise ConfigError(f"unknown backend {backend!r}")


# ---------------------------------------------------------------------- run


def cmd_run(args) -> int:
    suite = load_suite()
    circuits = _parse_circuits(args.circuits, suite)
    if args.readout_p is not None and not 0.0 <= args.readout_p <= 0.5:
        raise ConfigError(f"--readout-p outside [0, 0.5]: {args.readout_p}")
    config_doc = _load_json_file(args.config) if args.config else None
    run_one, norm_config = _make_runner(args.backend, config_doc, args.mode)

    core = {
        "backend": args.backend,
        "config": norm_config,
        "circuits": [c.id for c in circuits],
        "mode": args.mode,
        "readout_p": args.readout_p,
        "suite_sha256": SUITE_SHA256,
        "version": __version__,
    }
    root = _registry_root(args.out)
    run_id = _digest(core)
    existing = _existing_entry(root, run_id)
    if existing:
        print(f"run {run_id} already in registry at {existing}")
        return 0

    modes = ("bare", "encoded") if args.mode == "both" else (args.mode,)
    tasks = [(c, m) for c in circuits for m in modes]

    def execute(task):
        c, m = task
        pc = lower_bare(c) if m == "bare" else lower_encoded(c)
        dist, meta = run_one(pc)
        if args.readout_p:
            dist = apply_readout_error(dist, args.readout_p)
        return {
            "id": c.id,
            "mode": m,
            "width": dist.width,
            "dist": dist.to_dict(),
            "meta": meta,
        }

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            records = list(pool.map(execute, tasks))
    else:
        records = [execute(t) for t in tasks]
    # output order is fixed by (id, mode) regardless of completion order
    records.sort(key=lambda r: (r["id"], r["mode"]))
    body = "".join(_canonical(r) + "\n" for r in records)
    run_dir = _write_entry(root, run_id, core, {"records.jsonl": body})
    print(f"run {run_id} written to {run_dir} ({len(records)} records)")
    return 0


# ------------------------------------------------------------------ analyze


def _load_run(ref: str):
    """Resolve a run by registry id or by directory path."""
    path = ref if os.path.isdir(ref) else os.path.join(_registry_root(None), ref)
    man_path = os.path.join(path, "manifest.json")
    if not os.path.isfile(man_path):
        raise ConfigError(f"no run found at {ref!r}")
    manifest = _load_json_file(man_path)
    records = {}
    rec_path = os.path.join(path, "records.jsonl")
    try:
        with open(rec_path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ParseError(f"{rec_path} line {line_no}: {exc}") from exc
                records[(rec["id"], rec["mode"])] = (rec["width"], rec["dist"])
    except OSError as exc:
        raise DataIntegrityError(f"cannot read {rec_path}: {exc}") from exc
    except KeyError as exc:
        raise DataIntegrityError(f"{rec_path}: record missing field {exc}") from None
    return manifest, records


def _report_svg(report) -> str:
    """Distance curves plus kept-fraction dots, one x slot per circuit."""
    recs = sorted(report.records, key=lambda r: r.circuit_id)
    n = len(recs)
    width, height = 860.0, 420.0
    ml, mr, mt, mb = 60.0, 60.0, 24.0, 48.0
    span_x, span_y = width - ml - mr, height - mt - mb
    top = 1.05 * max(0.05, max(max(r.d_bare, r.d_enc) for r in recs))

    def x_at(i):
        return ml + span_x * (i / max(n - 1, 1))

    def y_dist(v):
        return mt + span_y * (1.0 - v / top)

    def y_ratio(v):
        return mt + span_y * (1.0 - v)

    def fmt(v):
        return f"{v:.2f}"

    def polyline(values, color):
        pts = " ".join(f"{fmt(x_at(i))},{fmt(y_dist(v))}" for i, v in enumerate(values))
        return f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>'

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}">',
        f'<rect width="{width:.0f}" height="{height:.0f}" fill="white"/>',
        f'<line x1="{fmt(ml)}" y1="{fmt(mt)}" x2="{fmt(ml)}" y2="{fmt(height - mb)}" stroke="black"/>',
        f'<line x1="{fmt(ml)}" y1="{fmt(height - mb)}" x2="{fmt(width - mr)}" y2="{fmt(height - mb)}" stroke="black"/>',
        f'<line x1="{fmt(width - mr)}" y1="{fmt(mt)}" x2="{fmt(width - mr)}" y2="{fmt(height - mb)}" stroke="black"/>',
        f'<text x="{fmt(ml - 8)}" y="{fmt(y_dist(0.0) + 4)}" text-anchor="end" font-size="11">0</text>',
        f'<text x="{fmt(ml - 8)}" y="{fmt(y_dist(top) + 4)}" text-anchor="end" font-size="11">{top:.3f}</text>',
        f'<text x="{fmt(width - mr + 8)}" y="{fmt(y_ratio(0.0) + 4)}" font-size="11">0</text>',
        f'<text x="{fmt(width - mr + 8)}" y="{fmt(y_ratio(1.0) + 4)}" font-size="11">1</text>',
        f'<text x="{fmt(ml)}" y="14" font-size="11">distance (left), kept fraction (right dots)</text>',
        f'<text x="{fmt(width - mr - 200)}" y="14" font-size="11">D_bare gray, D_enc red</text>',
        polyline([r.d_bare for r in recs], "#777777"),
        polyline([r.d_enc for r in recs], "#cc0000"),
    ]
    for i, r in enumerate(recs):
        parts.append(
            f'<circle cx="{fmt(x_at(i))}" cy="{fmt(y_ratio(r.ratio))}" r="2.5" fill="#2255cc"/>'
        )
    step = max(1, (n + 15) // 16)
    for i in range(0, n, step):
        parts.append(
            f'<text x="{fmt(x_at(i))}" y="{fmt(height - mb + 16)}" text-anchor="middle" '
            f'font-size="10">{recs[i].circuit_id}</text>'
        )
    parts.append(
        f'<text x="{fmt(ml + span_x / 2)}" y="{fmt(height - 8)}" text-anchor="middle" '
        f'font-size="11">circuit id</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_analyze(args) -> int:
    if args.readout_p is not None and not 0.0 <= args.readout_p <= 0.5:
        raise ConfigError(f"--readout-p outside [0, 0.5]: {args.readout_p}")
    bare_man, bare_all = _load_run(args.bare)
    enc_man, enc_all = _load_run(args.encoded)
    bare = {i: v for (i, m), v in bare_all.items() if m == "bare"}
    enc = {i: v for (i, m), v in enc_all.items() if m == "encoded"}
    if not bare:
        raise ConfigError(f"run {args.bare!r} holds no bare records")
    if not enc:
        raise ConfigError(f"run {args.encoded!r} holds no encoded records")
    if set(bare) != set(enc):
        only_b = sorted(set(bare) - set(enc))[:5]
        only_e = sorted(set(enc) - set(bare))[:5]
        raise ConfigError(
            f"suite selections differ between runs (bare-only {only_b}, encoded-only {only_e})"
        )

    suite = load_suite()
    b_tag = bare_man.get("digest_fields", {}).get("backend", "?")
    e_tag = enc_man.get("digest_fields", {}).get("backend", "?")
    backend = b_tag if b_tag == e_tag else f"{b_tag}+{e_tag}"
    pair_id = f"{bare_man['run_id']}+{enc_man['run_id']}"

    records = []
    for i in sorted(bare):
        if not 0 <= i < len(suite):
            raise ConfigError(f"unknown circuit id {i} in run records")
        bw, bd = bare[i]
        ew, ed = enc[i]
        records.append(
            evaluate_circuit(
                suite[i],
                Distribution.from_dict(bw, bd),
                Distribution.from_dict(ew, ed),
                args.readout_p,
                backend=backend,
                config_digest=pair_id,
            )
        )
    report = build_report(records)

    doc = {
        "backend": backend,
        "runs": {"bare": bare_man["run_id"], "encoded": enc_man["run_id"]},
        "readout_p": args.readout_p,
        "percentage_p": report.percentage_p,
        "criterion_pass": report.criterion_pass,
        "records": [
            {
                "id": r.circuit_id,
                "d_bare": r.d_bare,
                "d_enc": r.d_enc,
                "r": r.ratio,
            }
            for r in report.records
        ],
    }
    base, ext = os.path.splitext(args.out)
    json_path = args.out if ext else args.out + ".json"
    if not ext:
        base = args.out
    os.makedirs(os.path.dirname(os.path.abspath(json_path)), exist_ok=True)
    with open(json_path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    with open(base + ".csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "D_bare", "D_enc", "r"])
        for r in report.records:
            writer.writerow([r.circuit_id, r.d_bare, r.d_enc, r.ratio])
    with open(base + ".svg", "w", encoding="utf-8") as fh:
        fh.write(_report_svg(report))
    verdict = "passes" if report.criterion_pass else "fails"
    print(
        f"{len(report.records)} circuits, {report.percentage_p:.1f}% with D_enc < D_bare; "
        f"criterion {verdict}; wrote {json_path}, {base}.csv, {base}.svg"
    )
    return 0


# ------------------------------------------------------- t2 / optimize / import


def cmd_t2(args) -> int:
    cfg = SpinBathConfig(lam=args.lam, beta=args.beta, n_env=args.ne, seed=args.seed)
    core = {
        "op": "t2",
        "config": cfg.to_dict(),
        "qubit": args.qubit,
        "window": args.window,
        "samples": args.samples,
        "version": __version__,
    }
    root = _registry_root(args.out)
    run_id = _digest(core)
    existing = _existing_entry(root, run_id)
    if existing:
        doc = _load_json_file(os.path.join(existing, "result.json"))
        t2 = doc["t2_ns"]
        print(f"run {run_id} already in registry: T2 = {t2} ns")
        return 0
    t2 = estimate_t2(cfg, qubit=args.qubit, window=args.window, n_samples=args.samples)
    doc = {"t2_ns": t2 if math.isfinite(t2) else None}
    run_dir = _write_entry(
        root, run_id, core, {"result.json": json.dumps(doc, sort_keys=True) + "\n"}
    )
    shown = f"{t2:.4g} ns" if math.isfinite(t2) else "no measurable decay"
    print(f"T2 = {shown} (run {run_id} at {run_dir})")
    return 0


def cmd_optimize(args) -> int:
    if args.device != "reduced-q0r1":
        raise ConfigError(f"unknown device {args.device!r}; only reduced-q0r1 is wired up")
    if args.gate != "xpih":
        raise ConfigError(f"unknown gate {args.gate!r}; only xpih is wired up")
    gate_set = "withf" if args.withf else "plain"
    core = {
        "op": "optimize",
        "device": args.device,
        "gate": args.gate,
        "gate_set": gate_set,
        "tune_freq": args.tune_freq,
        "max_iters": args.max_iters,
        "version": __version__,
    }
    root = _registry_root(args.out)
    run_id = _digest(core)
    existing = _existing_entry(root, run_id)
    if existing:
        doc = _load_json_file(os.path.join(existing, "result.json"))
        print(f"run {run_id} already in registry: f_avg = {doc['f_avg']}")
        return 0

    dev = load_device()
    red = reduce_device(dev, (0,), (1,))
    bas = build_basis(red)
    fq = dressed_qubit_freq(red, bas, 0)
    # start from the stored parameters but drive at this device's resonance
    init = replace(load_pulse_library(gate_set).xpih_pulse(0), freq=fq)
    res = optimize_pulse(
        red, bas, "xpih", (0,), init, tune_freq=args.tune_freq, max_iters=args.max_iters
    )
    pulse = res.pulse
    doc = {
        "delta": res.delta,
        "f_avg": res.f_avg,
        "n_evals": res.n_evals,
        "history": list(res.history),
        "qubit_freq": fq,
        "pulse": {
            "shape": pulse.shape,
            "amplitude": pulse.amplitude,
            "duration": pulse.duration,
            "sigma": pulse.sigma,
            "freq": pulse.freq,
            "drag": pulse.drag,
        },
    }
    run_dir = _write_entry(
        root, run_id, core, {"result.json": json.dumps(doc, sort_keys=True, indent=2) + "\n"}
    )
    print(
        f"optimized {args.gate} on {args.device}: delta {res.delta:.3e}, "
        f"f_avg {res.f_avg:.5f}, f {pulse.freq:.6f} GHz (run {run_id} at {run_dir})"
    )
    return 0


def cmd_import(args) -> int:
    imported = import_counts(args.source)
    records = []
    for item in imported:
        records.append(
            {
                "id": item.circuit_id,
                "mode": args.mode,
                "width": item.dist.width,
                "dist": item.dist.to_dict(),
                "meta": {"shots": item.shots},
            }
        )
    records.sort(key=lambda r: (r["id"], r["mode"]))
    with open(args.source, "rb") as fh:
        source_sha = hashlib.sha256(fh.read()).hexdigest()
    core = {
        "op": "import",
        "backend": "imported",
        "mode": args.mode,
        "source_sha256": source_sha,
        "version": __version__,
    }
    root = _registry_root(args.out)
    run_id = _digest(core)
    existing = _existing_entry(root, run_id)
    if existing:
        print(f"run {run_id} already in registry at {existing}")
        return 0
    body = "".join(_canonical(r) + "\n" for r in records)
    run_dir = _write_entry(root, run_id, core, {"records.jsonl": body})
    print(f"imported {len(records)} records as run {run_id} at {run_dir}")
    return 0


# --------------------------------------------------------------------- parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ftlab",
        description="Run encoded-vs-bare circuit suites and analyze the results.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a circuit suite on one backend")
    p_run.add_argument("--backend", required=True, choices=("ideal", "spinbath", "transmon"))
    p_run.add_argument("--config", default=None, help="backend config JSON file")
    p_run.add_argument("--circuits", default="all", help="all, selected15, or ID,ID,...")
    p_run.add_argument("--mode", default="both", choices=("bare", "encoded", "both"))
    p_run.add_argument("--readout-p", dest="readout_p", type=float, default=None)
    p_run.add_argument("--out", default=None, help="registry root directory")
    p_run.add_argument("--jobs", type=int, default=1)
    p_run.set_defaults(func=cmd_run)

    p_an = sub.add_parser("analyze", help="compare a bare run against an encoded run")
    p_an.add_argument("--bare", required=True, help="run id or run directory")
    p_an.add_argument("--encoded", required=True, help="run id or run directory")
    p_an.add_argument("--readout-p", dest="readout_p", type=float, default=None)
    p_an.add_argument("--out", required=True, help="report JSON path (CSV/SVG written beside it)")
    p_an.set_defaults(func=cmd_analyze)

    p_t2 = sub.add_parser("t2", help="estimate the dephasing time of one qubit")
    p_t2.add_argument("--lambda", dest="lam", type=float, required=True)
    p_t2.add_argument("--beta", type=float, default=0.0)
    p_t2.add_argument("--ne", type=int, default=12)
    p_t2.add_argument("--qubit", type=int, default=0)
    p_t2.add_argument("--window", type=float, default=50.0, help="evolution window (ns)")
    p_t2.add_argument("--samples", type=int, default=24)
    p_t2.add_argument("--seed", type=int, default=7)
    p_t2.add_argument("--out", default=None, help="registry root directory")
    p_t2.set_defaults(func=cmd_t2)

    p_opt = sub.add_parser("optimize", help="pulse-shape search on a reduced device")
    p_opt.add_argument("--device", default="reduced-q0r1")
    p_opt.add_argument("--gate", default="xpih")
    p_opt.add_argument("--withf", action="store_true", help="start from the withf gate set")
    p_opt.add_argument("--tune-freq", dest="tune_freq", action="store_true")
    p_opt.add_argument("--max-iters", dest="max_iters", type=int, default=200)
    p_opt.add_argument("--out", default=None, help="registry root directory")
    p_opt.set_defaults(func=cmd_optimize)

    p_imp = sub.add_parser("import", help="convert measured counts into a registry run")
    p_imp.add_argument("source", help="counts file, one JSON object per line")
    p_imp.add_argument("--mode", required=True, choices=("bare", "encoded"))
    p_imp.add_argument("--out", default=None, help="registry root directory")
    p_imp.set_defaults(func=cmd_import)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _NUMERIC_ERRORS as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
