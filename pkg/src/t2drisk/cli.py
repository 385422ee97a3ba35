"""Command-line pipeline: synth, fit, select, eval, traindl, serve.

Every command takes a single ``--seed`` controlling all randomness (required
under ``--strict``) and writes its outputs under ``--out`` together with a
manifest (sha256 per output).  Primary outputs are byte-identical across
reruns with the same inputs and seed; only manifest/provenance sidecars
carry timestamps.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CohortError, ConfigError, EvaluationError, NumericError, T2DRiskError


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); usage errors are exit 1
        raise UsageError(message)


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out_dir: Path, command: str, args: dict, outputs: list[Path]) -> None:
    manifest = {
        "command": command,
        "args": args,
        "package_version": __version__,
        "created_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "outputs": [
            {"path": p.name, "sha256": _sha256(p), "bytes": p.stat().st_size}
            for p in outputs
        ],
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _seed(args) -> int:
    if args.seed is None:
        if args.strict:
            raise UsageError("--seed is required in --strict mode")
        return 0
    return args.seed


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [repr(v) if isinstance(v, float) else v for v in row]
            )


# --- commands ---------------------------------------------------------------


def cmd_synth(args) -> int:
    from . import synthetic
    from .cohort import write_cohort_csv

    out = _out_dir(args)
    seed = _seed(args)
    if args.config:
        config = synthetic.load_config(args.config)
        if args.n is not None:
            config = dataclasses.replace(config, n=args.n)
        config = dataclasses.replace(config, seed=seed)
    else:
        if args.n is None:
            raise UsageError("--n is required with --preset")
        config = synthetic.reference_preset(n=args.n, seed=seed)
    if config.n <= 0:
        raise ConfigError(f"cohort size must be positive, got {config.n}")

    records, outcomes = synthetic.generate(config)
    cohort_path = out / "cohort.csv"
    write_cohort_csv(str(cohort_path), records, outcomes)
    provenance = {
        "generator": "config" if args.config else "reference_preset",
        "config": config.to_dict(),
        "created_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    prov_path = out / "provenance.json"
    with open(prov_path, "w") as fh:
        json.dump(provenance, fh, indent=1, sort_keys=True)
        fh.write("\n")
    _write_manifest(out, "synth", {"n": config.n, "seed": seed}, [cohort_path])
    print(f"wrote {cohort_path} ({config.n} rows)")
    return 0


def _load_cohort(path: str):
    from .cohort import encode, ingest_csv

    result = ingest_csv(path)
    if not result.records:
        raise CohortError(f"{path}: no usable rows")
    cohort = encode(result.records, result.outcomes)
    return result, cohort


def _coefficients_rows(doc: dict) -> list[list]:
    diag = doc["diagnostics"]
    rows = []
    for i, feature in enumerate(doc["features"]):
        rows.append(
            [
                feature["name"],
                feature["coefficient"],
                diag["ci95_low"][i],
                diag["ci95_high"][i],
                diag["neg_log2_p"][i],
            ]
        )
    rows.sort(key=lambda r: -r[1])
    return rows


def cmd_fit(args) -> int:
    from . import cox
    from .cohort import decode, stratified_split, write_cohort_csv

    out = _out_dir(args)
    seed = _seed(args)
    result, cohort = _load_cohort(args.cohort)
    train, test = stratified_split(cohort, args.test_fraction, seed)
    options = cox.FitOptions(tol=args.tol, max_iter=args.max_iter, ridge=args.ridge)
    model, diagnostics = cox.fit(train, options)

    model_path = out / "model.json"
    cox.save_model(model, str(model_path), diagnostics)
    doc = cox.model_to_document(model, diagnostics)
    coef_path = out / "coefficients.csv"
    _write_csv(
        coef_path,
        ["feature", "log_hr", "ci_low", "ci_high", "neg_log2_p"],
        _coefficients_rows(doc),
    )
    test_records = decode(test)
    from .cohort import Outcome

    test_outcomes = [Outcome(float(t), bool(e)) for t, e in zip(test.times, test.events)]
    test_path = out / "test.csv"
    write_cohort_csv(str(test_path), test_records, test_outcomes)

    _write_manifest(
        out,
        "fit",
        {
            "cohort": args.cohort,
            "seed": seed,
            "test_fraction": args.test_fraction,
            "rows_read": result.n_read,
            "rows_excluded": result.n_excluded,
            "train_rows": train.n,
            "test_rows": test.n,
            "converged": diagnostics.converged,
            "iterations": diagnostics.iterations,
        },
        [model_path, coef_path, test_path],
    )
    print(
        f"fit {train.n} train rows in {diagnostics.iterations} iterations "
        f"(converged={diagnostics.converged}); wrote {model_path}"
    )
    return 0


def cmd_select(args) -> int:
    from .selection import backward_eliminate

    out = _out_dir(args)
    seed = _seed(args)
    _, cohort = _load_cohort(args.cohort)
    kept, ledger = backward_eliminate(cohort, folds=args.folds, seed=seed)
    ledger_path = out / "ledger.jsonl"
    ledger.save(str(ledger_path))
    features_path = out / "features.txt"
    features_path.write_text("".join(f"{name}\n" for name in kept))
    _write_manifest(
        out,
        "select",
        {"cohort": args.cohort, "seed": seed, "folds": args.folds, "kept": len(kept)},
        [ledger_path, features_path],
    )
    print(f"kept {len(kept)}/{cohort.p} features; wrote {features_path}")
    return 0


def cmd_eval(args) -> int:
    from . import cox
    from .cohort import design_row, ingest_csv
    from .metrics import evaluate_risk_scores

    out = _out_dir(args)
    seed = _seed(args)
    model = cox.load_model(args.model)
    with open(args.model) as fh:
        doc = json.load(fh)
    result = ingest_csv(args.cohort)
    if not result.records:
        raise CohortError(f"{args.cohort}: no usable rows")
    prev = "previous_smoker" in model.feature_names
    raw = np.stack([design_row(r, include_previous_smoker=prev) for r in result.records])
    for name, (center, scale) in model.standardization.items():
        j = model.feature_names.index(name)
        raw[:, j] = (raw[:, j] - center) / scale
    horizon = args.horizon if args.horizon is not None else model.horizon
    risks = model.risk_from_matrix(raw, horizon)
    times = np.array([o.time for o in result.outcomes])
    events = np.array([o.event for o in result.outcomes])
    report = evaluate_risk_scores(
        risks, times, events, horizon, bootstrap_rounds=args.bootstrap_rounds, seed=seed
    )

    report_path = out / "report.json"
    report_path.write_text(report.to_json() + "\n")
    cal_path = out / "calibration.csv"
    _write_csv(cal_path, ["predicted", "observed_smoothed"], report.calibration_curve)
    outputs = [report_path, cal_path]
    if "diagnostics" in doc:
        forest_path = out / "forest.csv"
        _write_csv(
            forest_path,
            ["feature", "log_hr", "ci_low", "ci_high", "neg_log2_p"],
            _coefficients_rows(doc),
        )
        outputs.append(forest_path)
    _write_manifest(
        out,
        "eval",
        {
            "model": args.model,
            "cohort": args.cohort,
            "seed": seed,
            "bootstrap_rounds": args.bootstrap_rounds,
            "horizon": horizon,
        },
        outputs,
    )
    print(
        f"c-index {report.c_index:.4f} "
        f"(95% CI {report.c_index_ci[0]:.4f}-{report.c_index_ci[1]:.4f}); "
        f"mean predicted {report.mean_predicted_risk:.4%}, "
        f"observed {report.mean_observed_risk:.4%}, ICI {report.ici:.4%}"
    )
    return 0


def cmd_traindl(args) -> int:
    import yaml

    from .neural import NetConfig, save_weights, train

    out = _out_dir(args)
    seed = _seed(args)
    _, cohort = _load_cohort(args.cohort)
    if args.netconfig:
        with open(args.netconfig) as fh:
            config = NetConfig.from_dict(yaml.safe_load(fh) or {})
        config = dataclasses.replace(config, seed=seed)
    else:
        config = NetConfig(seed=seed)
    if args.epochs is not None:
        config = dataclasses.replace(config, epochs=args.epochs)
    if args.batch_size is not None:
        config = dataclasses.replace(config, batch_size=args.batch_size)

    model, trace = train(cohort, config)
    weights_path = out / "weights.bin"
    save_weights(model, str(weights_path))
    trace_path = out / "loss_trace.csv"
    _write_csv(trace_path, ["epoch", "loss"], list(enumerate(trace, start=1)))
    _write_manifest(
        out,
        "traindl",
        {
            "cohort": args.cohort,
            "seed": seed,
            "config": config.to_dict(),
            "skipped_batches": model.skipped_batches,
        },
        [weights_path, trace_path],
    )
    print(f"trained {config.epochs} epochs; wrote {weights_path}")
    return 0


def cmd_serve(args) -> int:
    from .engine import bundled_model, load_artifact

    model = load_artifact(args.model) if args.model else bundled_model()
    if args.check:
        print(f"model {model.version} ok (S0={model.baseline_survival:.6f})")
        return 0
    import uvicorn

    from .service import create_app

    app = create_app(model, cors_origins=tuple(args.cors_origin or ()))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_build_engine(args) -> int:
    from .engine import build_reference_model, save_artifact

    model = build_reference_model(target_mean_risk=args.target)
    save_artifact(model, args.out)
    print(f"wrote {args.out} (S0={model.baseline_survival:.6f})")
    return 0


# --- parser -----------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="t2drisk", description=__doc__)
    parser.add_argument("--strict", action="store_true", help="require --seed")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("synth", help="generate a synthetic cohort CSV")
    common(p)
    p.add_argument("--config", help="generator config YAML")
    p.add_argument("--preset", choices=["reference"], default="reference")
    p.add_argument("--n", type=int, default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit", help="encode, split, fit Cox, write model + report")
    common(p)
    p.add_argument("cohort")
    p.add_argument("--test-fraction", type=float, default=0.25)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--ridge", type=float, default=0.0)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("select", help="backward elimination; write ledger + features")
    common(p)
    p.add_argument("cohort")
    p.add_argument("--folds", type=int, default=2)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("eval", help="c-index + bootstrap CI + calibration report")
    common(p)
    p.add_argument("model")
    p.add_argument("cohort")
    p.add_argument("--bootstrap-rounds", type=int, default=50)
    p.add_argument("--horizon", type=float, default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("traindl", help="train the neural Cox model")
    common(p)
    p.add_argument("cohort")
    p.add_argument("--netconfig", help="NetConfig YAML")
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.set_defaults(func=cmd_traindl)

    p = sub.add_parser("serve", help="start the HTTP scoring service")
    p.add_argument("--model", help="risk-engine artifact (default: bundled)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8432)
    p.add_argument("--cors-origin", action="append")
    p.add_argument("--check", action="store_true", help="load the artifact and exit")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("build-engine", help="rebuild the risk-engine artifact")
    p.add_argument("--out", required=True)
    p.add_argument("--target", type=float, default=0.0359)
    p.set_defaults(func=cmd_build_engine)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (CohortError, ConfigError, EvaluationError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except T2DRiskError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
