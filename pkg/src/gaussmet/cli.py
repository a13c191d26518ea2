"""Command-line front end: file-driven, seeded, machine-readable reports.

Exit codes: 0 success, 2 validation error (bad flags, unreadable files,
parse errors), 3 numeric failure (a bound violated, which signals an engine
bug and is never silent).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import circuit_model as cm
from . import measurement_sim as ms
from . import optimal_probe as op
from . import qfi_engine as qe
from . import sequential_planner as sp
from .errors import GaussmetError, IoError
from .gaussian_core import GaussianState, new_state, random_state, state_from_json

SCHEMA = "gaussmet/1"

TABLE1_CIRCUITS = ("mz1", "mz2", "two_mode_mixing", "three_mode_mixing")


class NumericFailure(GaussmetError):
    """An engine-level bound was violated; reported via exit code 3."""


def _load_circuit(path: str):
    if path in cm.corpus_names():
        return cm.load_corpus(path)
    return cm.parse_circuit(Path(path).read_text())


def _build_state(spec: str, circuit, phi: float, nbar: float | None) -> GaussianState:
    """Resolve a state alias (vacuum, coherent:<amp>, squeezed:<r>,
    thermal:<sigma>, optimal) or load a state JSON file."""
    modes = circuit.modes
    if spec == "vacuum":
        return new_state(np.eye(2 * modes) / 2)
    if spec.startswith("coherent:"):
        amp = float(spec.split(":", 1)[1])
        disp = np.zeros(2 * modes)
        disp[0] = np.sqrt(2) * amp
        return new_state(np.eye(2 * modes) / 2, disp)
    if spec.startswith("squeezed:"):
        r = float(spec.split(":", 1)[1])
        diag = np.ones(2 * modes) / 2
        diag[0] = np.exp(2 * r) / 2
        diag[modes] = np.exp(-2 * r) / 2
        return new_state(np.diag(diag))
    if spec.startswith("thermal:"):
        sigma = float(spec.split(":", 1)[1])
        return new_state(sigma * np.eye(2 * modes))
    if spec == "optimal":
        if nbar is None:
            raise ValueError("the 'optimal' state alias needs --nbar")
        return op.optimal_state(circuit, phi, nbar).state
    return state_from_json(Path(spec).read_text())


def _emit(payload, fmt: str, output_path: str | None, rows=None) -> None:
    """Write a report deterministically as JSON or CSV.

    ``rows`` (list of dicts with identical keys) drives the CSV layout when
    given; otherwise the flat payload becomes a single CSV row.
    """
    if fmt == "json":
        text = json.dumps({"schema": SCHEMA, **payload}, indent=2) + "\n"
    else:
        buf = io.StringIO()
        table = rows if rows is not None else [payload]
        writer = csv.DictWriter(buf, fieldnames=list(table[0].keys()))
        writer.writeheader()
        writer.writerows(table)
        text = buf.getvalue()
    if output_path:
        try:
            Path(output_path).write_text(text)
        except OSError as exc:
            raise IoError(str(exc)) from exc
    else:
        sys.stdout.write(text)


def _check_report(report: qe.QfiReport) -> None:
    if report.saturation_residual < -1e-8 * max(1.0, report.bound):
        raise NumericFailure(
            f"QFI {report.qfi:.12g} exceeds the bound {report.bound:.12g}"
        )


def _cmd_qfi(args) -> dict:
    circuit = _load_circuit(args.circuit_path)
    state = _build_state(args.state_path, circuit, args.phi, args.nbar)
    report = qe.qfi(state, circuit, args.phi)
    _check_report(report)
    return {"command": "qfi", "phi": args.phi, **report.to_dict()}


def _cmd_bound(args) -> dict:
    circuit = _load_circuit(args.circuit_path)
    spectrum = cm.generator(circuit, args.phi)
    return {
        "command": "bound",
        "phi": args.phi,
        "nbar": args.nbar,
        "specnorm": spectrum.specnorm,
        "bound": qe.qfi_bound(spectrum.specnorm, args.nbar),
    }


def _cmd_optimal_probe(args) -> dict:
    circuit = _load_circuit(args.circuit_path)
    probe = op.optimal_state(circuit, args.phi, args.nbar)
    return {"command": "optimal-probe", "phi": args.phi, "nbar": args.nbar,
            **probe.to_dict()}


def _cmd_homodyne(args) -> dict:
    circuit = _load_circuit(args.circuit_path)
    r0 = op.squeeze_param(args.nbar)
    theta = args.theta if args.theta is not None else ms.optimal_theta(r0)
    phi_guess = args.phi_guess if args.phi_guess is not None else args.phi
    model = ms.homodyne_model(circuit, args.phi, phi_guess, theta, r0)
    return {"command": "homodyne", "phi": args.phi, "phi_guess": phi_guess,
            "nbar": args.nbar, **model.to_dict()}


def _cmd_montecarlo(args):
    circuit = _load_circuit(args.circuit_path)
    run = ms.run_estimation(
        circuit, args.phi, args.nbar, n_samples=args.samples,
        replications=args.replications, seed=args.seed, theta=args.theta,
        jobs=args.jobs,
    )
    rows = [
        {"seed": int(s), "phi_hat": float(e)}
        for s, e in zip(run.rep_seeds, run.estimates)
    ]
    return {"command": "montecarlo", **run.summary()}, rows


def _cmd_sequential(args) -> dict:
    circuit = _load_circuit(args.circuit_path)
    total_modes = circuit.modes + args.ancillas
    controls = sp.optimal_controls(circuit, args.phi, args.L, total_modes)
    report = sp.sequential_qfi(circuit, controls, args.L, total_modes, args.phi, args.nbar)
    _check_report(report)
    single = cm.generator(circuit, args.phi).specnorm
    bound = sp.sequential_bound(single, args.L, args.nbar)
    if abs(report.qfi - bound) > 1e-6 * max(1.0, bound):
        raise NumericFailure("optimal sequential controls failed to reach the bound")
    return {
        "command": "sequential", "phi": args.phi, "nbar": args.nbar,
        "L": args.L, "K": total_modes, "single_pass_specnorm": single,
        "bound": bound, **report.to_dict(),
    }


def _cmd_audit(args) -> dict:
    checked = 0
    violations = 0
    worst_slack = np.inf
    worst_lambda = 0.0
    pool = [("ps1", cm.parse_circuit("modes 1\nps 1 -phi"))]
    pool += [(name, cm.load_corpus(name)) for name in TABLE1_CIRCUITS]
    pool = [(n, c) for n, c in pool if c.modes <= args.modes]
    rng = np.random.default_rng(args.seed)
    for k in range(args.seeds):
        name, circuit = pool[k % len(pool)]
        nbar = float(rng.uniform(0.1, 5.0))
        phi = float(rng.uniform(-np.pi, np.pi))
        purity_class = "pure" if k % 2 == 0 else "mixed"
        state = random_state(circuit.modes, nbar, purity_class, seed=args.seed + 7 * k + 1)
        report = qe.qfi(state, circuit, phi)
        checked += 1
        slack = report.saturation_residual / max(1.0, report.bound)
        worst_slack = min(worst_slack, slack)
        if slack < -1e-8:
            violations += 1
        if report.route == "mixed-stein":
            worst_lambda = max(worst_lambda, report.lambda_residual)
            if report.lambda_residual > 1e-9:
                violations += 1
    result = {
        "command": "audit", "checked": checked, "violations": violations,
        "worst_relative_slack": float(worst_slack),
        "worst_lambda_residual": float(worst_lambda),
    }
    if violations:
        raise NumericFailure(f"audit found {violations} violations: {result}")
    return result


def _cmd_lemmas(args) -> dict:
    rng = np.random.default_rng(args.seed)
    worst = np.inf
    for _ in range(args.seeds):
        n = int(rng.integers(2, 7))
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        b = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        report = qe.verify_matrix_lemmas(a + a.conj().T, b + b.conj().T)
        worst = min(worst, report.slack_commutator, report.slack_transpose,
                    report.slack_specnorm, report.slack_rank_one)
    if worst < -1e-10:
        raise NumericFailure(f"matrix lemma violated with slack {worst:.3g}")
    return {"command": "lemmas", "pairs": args.seeds, "min_slack": float(worst)}


def _cmd_table1(args):
    rows = []
    for name in TABLE1_CIRCUITS:
        circuit = cm.load_corpus(name)
        probe = op.optimal_state(circuit, args.phi, args.nbar)
        report = qe.qfi(probe.state, circuit, args.phi)
        _check_report(report)
        rows.append({
            "circuit": name,
            "specnorm": cm.generator(circuit, args.phi).specnorm,
            "qfi": report.qfi,
            "bound": report.bound,
        })
    return {"command": "table1", "nbar": args.nbar, "phi": args.phi,
            "rows": rows}, rows


def _add_common(parser, *, phi=True, nbar=False, circuit=True):
    if circuit:
        parser.add_argument("--circuit-path", "--circuit", dest="circuit_path",
                            required=True, help="circuit file or corpus name")
    if phi:
        parser.add_argument("--phi", type=float, required=True,
                            help="true parameter value (radians)")
    if nbar:
        parser.add_argument("--nbar", type=float, required=True,
                            help="mean photon number of the probe")
    parser.add_argument("--output-path", "--output", dest="output_path", default=None)
    parser.add_argument("--format", choices=("json", "csv"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaussmet",
        description="Gaussian-probe precision limits of passive linear circuits",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("qfi", help="QFI of a probe state through a circuit")
    _add_common(p)
    p.add_argument("--state-path", "--state", dest="state_path", required=True,
                   help="state JSON file or alias (vacuum, coherent:<amp>, "
                        "squeezed:<r>, thermal:<sigma>, optimal)")
    p.add_argument("--nbar", type=float, default=None,
                   help="photon budget, needed by the 'optimal' alias")
    p.set_defaults(func=_cmd_qfi)

    p = sub.add_parser("bound", help="universal QFI bound of a circuit")
    _add_common(p, nbar=True)
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("optimal-probe", help="bound-saturating probe state")
    _add_common(p, nbar=True)
    p.set_defaults(func=_cmd_optimal_probe)

    p = sub.add_parser("homodyne", help="homodyne variance/FI model")
    _add_common(p, nbar=True)
    p.add_argument("--theta", type=float, default=None,
                   help="quadrature angle (default: the FI-optimal one)")
    p.add_argument("--phi-guess", type=float, default=None)
    p.set_defaults(func=_cmd_homodyne)

    p = sub.add_parser("montecarlo", help="replicated MLE vs the Cramer-Rao floor")
    _add_common(p, nbar=True)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replications", type=int, default=200)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_montecarlo)

    p = sub.add_parser("sequential", help="L-pass strategy with inverting controls")
    _add_common(p, nbar=True)
    p.add_argument("--L", type=int, required=True, dest="L")
    p.add_argument("--ancillas", type=int, default=0)
    p.set_defaults(func=_cmd_sequential)

    p = sub.add_parser("audit", help="randomized universal-bound audit")
    p.add_argument("--seeds", type=int, default=1000)
    p.add_argument("--modes", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output-path", "--output", dest="output_path", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=_cmd_audit)

    p = sub.add_parser("lemmas", help="randomized Hermitian trace-inequality audit")
    p.add_argument("--seeds", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output-path", "--output", dest="output_path", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=_cmd_lemmas)

    p = sub.add_parser("table1", help="optimal QFI of the four shipped circuits")
    p.add_argument("--nbar", type=float, required=True)
    p.add_argument("--phi", type=float, default=0.3)
    p.add_argument("--output-path", "--output", dest="output_path", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=_cmd_table1)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.func(args)
    except NumericFailure as exc:
        print(f"gaussmet: numeric failure: {exc}", file=sys.stderr)
        return 3
    except (GaussmetError, OSError, ValueError, KeyError) as exc:
        print(f"gaussmet: {exc}", file=sys.stderr)
        return 2

    rows = None
    if isinstance(result, tuple):
        result, rows = result
    try:
        _emit(result, args.format, args.output_path, rows=rows)
    except IoError as exc:
        print(f"gaussmet: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
