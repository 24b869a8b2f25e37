"""
Doubly Sparse CS - Command Line Interface

    python -m doubly_sparse build   --n 8 --t 1 --l 1 --variant generic --out H.csv
    python -m doubly_sparse recover --matrix H.csv --measurement s.csv --out result.json
    python -m doubly_sparse recover --matrix H.csv --simulate --seed 7
    python -m doubly_sparse verify  --matrix H.csv --check cs
    python -m doubly_sparse bench   --n-list 16,32 --t 2 --l 2 --trials 20 --out bench.csv

Exit codes: 0 success / verdict true, 1 decoding failure or verdict false,
2 usage or spec error, 3 enumeration cap exceeded.
"""

from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional
import argparse
import logging
import sys

import numpy as np
import pandas as pd

from . import charts, matrix_io, oracle
from .config import ENUMERATION_CAP, TOOL_VERSION, VALUE_DISTRIBUTIONS, configure_logging
from .exceptions import DecodingFailure, DimensionMismatch, EnumerationCapExceeded, InvalidSpecError
from .numerics import Tolerance
from .recovery import recover
from .sensing_matrix import CSMatrixSpec, Variant, build, measure, singleton_bound
from .simulate import TrialConfig, random_dense_noise, random_sparse, records_to_frame, run_trials
from .utils import format_micros, format_number, format_rate, format_sparse, summarize_trials

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_CAP = 3

BENCH_COLUMNS = ['n', 't', 'l', 'variant', 'trial', 'seed', 'success', 'residual', 'outer_ok', 'decode_micros']
CHECKS = ('cs', 'pairwise', 'singleton', 'lambda', 'delta', 'proximity', 'mds', 'lp')


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec='seconds')


@dataclass
class RunManifest:
    """Provenance embedded in (or next to) every output file."""
    command: str
    config: Dict[str, Any]
    tool_version: str = TOOL_VERSION
    base_seed: Optional[int] = None
    started_at: str = field(default_factory=_now)
    finished_at: Optional[str] = None

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> 'RunManifest':
        config = {k: v for k, v in sorted(vars(args).items()) if k != 'handler'}
        return cls(command=args.command, config=config, base_seed=getattr(args, 'seed', None))

    def finish(self) -> Dict[str, Any]:
        self.finished_at = _now()
        return asdict(self)


def _tolerance(args: argparse.Namespace) -> Tolerance:
    return Tolerance(zero_tol=args.zero_tol, rank_tol=args.rank_tol, residual_tol=args.residual_tol)


def cmd_build(args: argparse.Namespace) -> int:
    """Build a (t, l)-CS matrix and write it to --out."""
    manifest = RunManifest.from_args(args)
    spec = CSMatrixSpec(args.n, args.t, args.l, Variant(args.variant))
    m = build(spec)
    out = args.out or f"matrix_n{args.n}_t{args.t}_l{args.l}_{args.variant}.csv"
    matrix_io.save_matrix(m, out, manifest.finish())
    print(f"✅ Built {m.variant.value} CS matrix: n={m.n}, t={m.t}, l={m.l}")
    print(f"   r = {m.r} rows (Singleton bound 2(t+l) = {singleton_bound(m.t, m.l)})")
    print(f"💾 Saved to {out}")
    return EXIT_OK


def _simulated_measurement(args: argparse.Namespace, m):
    rng = np.random.default_rng(args.seed)
    weight = m.t if args.weight is None else args.weight
    errors = m.l if args.errors is None else args.errors
    x = random_sparse(m.n, weight, args.distribution, rng)
    e = random_sparse(m.r, errors, args.distribution, rng)
    noise = random_dense_noise(m.r, args.noise_eps, rng) if args.noise_eps else None
    return measure(m, x, e, noise)


def cmd_recover(args: argparse.Namespace) -> int:
    """Recover x from a stored or simulated measurement."""
    manifest = RunManifest.from_args(args)
    m = matrix_io.load_matrix(args.matrix)
    if args.simulate:
        meas = _simulated_measurement(args, m)
        if args.save_measurement:
            matrix_io.save_measurement(meas, args.save_measurement, manifest.finish())
    elif args.measurement:
        meas = matrix_io.load_measurement(args.measurement)
    else:
        raise InvalidSpecError("recover needs --measurement PATH or --simulate")

    result = recover(m, meas.s_hat, _tolerance(args))
    doc = matrix_io.result_to_dict(result, manifest.finish(), include_timing=not args.no_timing)
    if args.out:
        matrix_io.save_json(doc, args.out)

    if not result.ok:
        print(f"❌ Recovery failed [{result.stage.value}]: {result.diagnostic}", file=sys.stderr)
        return EXIT_FAILURE

    print(f"✅ Recovered x_hat = {format_sparse(result.x_hat)}")
    print(f"   outer error positions: {list(result.outer_error_positions)}")
    print(f"   residual: {result.residual:.3e}")
    if meas.x is not None:
        matches = result.x_hat.support == meas.x.support and np.allclose(
            result.x_hat.to_dense(), meas.x.to_dense(), rtol=0.0,
            atol=1e-6 * max(1.0, float(np.max(np.abs(meas.x.to_dense()), initial=0.0))))
        print(f"{'✅' if matches else '❌'} Injected signal {'recovered' if matches else 'NOT recovered'}")
    return EXIT_OK


def _report(args: argparse.Namespace, m, H: np.ndarray, t: int, l: int, tol: Tolerance):
    check = args.check
    cap = args.cap
    if check == 'cs':
        return oracle.verify_cs_property(H, t, l, tol, cap)
    if check == 'pairwise':
        return oracle.pairwise_cs_check(H, t, l, args.samples, args.seed, tol)
    if check == 'singleton':
        return oracle.singleton_report(H, t, l, tol)
    if check == 'lambda':
        return oracle.extension_report(H, args.D or min(2 * t, H.shape[1]), tol, cap)
    if check == 'delta':
        return oracle.isometry_report(H, args.D or min(2 * t, H.shape[1]), cap)
    if check == 'proximity':
        return oracle.proximity_bound_check(H, t, args.epsilon, args.trials, args.seed, tol, cap)
    if check == 'mds':
        return oracle.verify_mds(m.outer_generator, tol, cap)
    return oracle.lp_recovery_condition(H, t, tol, cap)


def cmd_verify(args: argparse.Namespace) -> int:
    """Run an oracle check on a stored matrix."""
    manifest = RunManifest.from_args(args)
    m = matrix_io.load_matrix(args.matrix)
    t = m.t if args.t is None else args.t
    l = m.l if args.l is None else args.l
    H = np.array(m.H)
    if args.drop_row is not None:
        if not 0 <= args.drop_row < m.r:
            raise InvalidSpecError(f"--drop-row must lie in [0, {m.r}), got {args.drop_row}")
        H = np.delete(H, args.drop_row, axis=0)
        print(f"✂️ Dropped row {args.drop_row}: checking a {H.shape[0]}x{H.shape[1]} matrix")

    report = _report(args, m, H, t, l, _tolerance(args))
    if args.out:
        matrix_io.save_json(matrix_io.report_to_dict(report, manifest.finish()), args.out)

    print(f"📊 Check '{report.check}' over {format_number(report.enumeration_count)} cases")
    if report.statistic is not None:
        print(f"   statistic: {report.statistic:.6g}")
    if report.verdict:
        print("✅ Verdict: true")
        return EXIT_OK
    print("❌ Verdict: false")
    print(f"   witness: {matrix_io.to_jsonable(report.witness)}")
    return EXIT_FAILURE


def _bench_table(frame: pd.DataFrame, summary: pd.DataFrame, include_timing: bool) -> pd.DataFrame:
    """Trial rows followed by one summary row per (n, t, l, variant)."""
    rows: List[Dict[str, Any]] = []
    keys = ['n', 't', 'l', 'variant']
    for _, group in summary.iterrows():
        mask = np.logical_and.reduce([frame[k] == group[k] for k in keys])
        for _, rec in frame[mask].iterrows():
            rows.append({
                **{k: rec[k] for k in keys},
                'trial': int(rec['trial']), 'seed': int(rec['seed']),
                'success': int(rec['success']), 'residual': rec['residual'],
                'outer_ok': int(rec['outer_ok']),
                'decode_micros': rec['decode_micros'] if include_timing else '',
            })
        rows.append({
            **{k: group[k] for k in keys},
            'trial': 'summary', 'seed': '',
            'success': group['success_rate'], 'residual': group['max_residual'],
            'outer_ok': group['outer_rate'],
            'decode_micros': group['median_micros'] if include_timing else '',
        })
    return pd.DataFrame(rows, columns=BENCH_COLUMNS)


def _write_excel(path: str, frame: pd.DataFrame, summary: pd.DataFrame, manifest: Dict[str, Any]) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    flat = [{'key': k, 'value': str(v)} for k, v in manifest.items() if k != 'config']
    flat += [{'key': f"config.{k}", 'value': str(v)} for k, v in manifest['config'].items()]
    with pd.ExcelWriter(path, engine='openpyxl') as writer:
        frame.to_excel(writer, sheet_name='Trials', index=False)
        summary.to_excel(writer, sheet_name='Summary', index=False)
        pd.DataFrame(flat).to_excel(writer, sheet_name='Manifest', index=False)
    print(f"📗 Excel workbook: {path}")


def cmd_bench(args: argparse.Namespace) -> int:
    """Run recovery trials over a sweep of n and write the bench CSV."""
    manifest = RunManifest.from_args(args)
    try:
        n_list = [int(v) for v in args.n_list.split(',') if v.strip()]
    except ValueError as exc:
        raise InvalidSpecError(f"--n-list must be comma separated integers: {args.n_list!r}") from exc
    if not n_list:
        raise InvalidSpecError("--n-list is empty")
    variants = [Variant(v) for v in args.variant.split(',')]
    tol = _tolerance(args)

    records = []
    for variant in variants:
        for n in n_list:
            config = TrialConfig(n, args.t, args.l, variant, args.distribution, args.noise_eps,
                                 args.trials, args.seed)
            m = build(config.matrix_spec())
            records.extend(run_trials(config, m, tol, workers=args.workers))

    include_timing = not args.no_timing
    frame = records_to_frame(records)
    summary = summarize_trials(frame)
    if not include_timing:
        summary['median_micros'] = np.nan
    table = _bench_table(frame, summary, include_timing)
    manifest_doc = manifest.finish()
    matrix_io.save_bench_csv(table, args.out, manifest_doc)

    for _, row in summary.iterrows():
        print(f"📊 n={row['n']:>4} t={row['t']} l={row['l']} {row['variant']:<8} "
              f"success {format_rate(row['success_rate'])}, "
              f"median {format_micros(row['median_micros'])}")
    print(f"💾 Bench CSV: {args.out} (manifest {matrix_io.manifest_sidecar(args.out)})")

    if args.excel:
        _write_excel(args.excel, records_to_frame(records, include_timing), summary, manifest_doc)
    if args.plot:
        charts.save_html(charts.ChartBuilder.create_bench_report(summary), args.plot)
        print(f"📈 Chart: {args.plot}")
    return EXIT_OK


def _add_tolerance_flags(parser: argparse.ArgumentParser) -> None:
    defaults = Tolerance()
    parser.add_argument("--zero-tol", type=float, default=defaults.zero_tol, help="Zero threshold")
    parser.add_argument("--rank-tol", type=float, default=defaults.rank_tol, help="Rank threshold")
    parser.add_argument("--residual-tol", type=float, default=defaults.residual_tol, help="Residual gate")


def _add_instance_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="Random seed")
    parser.add_argument("--distribution", choices=VALUE_DISTRIBUTIONS, default='uniform',
                        help="Value distribution of x and e")
    parser.add_argument("--noise-eps", type=float, default=0.0, help="Dense noise l2 bound")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="doubly_sparse",
                                     description="Doubly sparse compressed sensing with real Reed-Solomon codes")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    parser.add_argument("--quiet", "-q", action="store_true", help="Warnings only")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="Build a (t, l)-CS matrix")
    p.add_argument("--n", type=int, required=True, help="Signal length")
    p.add_argument("--t", type=int, required=True, help="Signal sparsity")
    p.add_argument("--l", type=int, required=True, help="Number of gross errors")
    p.add_argument("--variant", choices=[v.value for v in Variant], default='generic')
    p.add_argument("--out", "-o", help="Matrix file path")
    p.set_defaults(handler=cmd_build)

    p = sub.add_parser("recover", help="Recover a sparse signal")
    p.add_argument("--matrix", required=True, help="Matrix file")
    p.add_argument("--measurement", help="Measurement file")
    p.add_argument("--simulate", action="store_true", help="Draw a random in-budget instance")
    p.add_argument("--weight", type=int, help="Signal weight when simulating (default t)")
    p.add_argument("--errors", type=int, help="Injected errors when simulating (default l)")
    p.add_argument("--save-measurement", help="Write the simulated measurement here")
    p.add_argument("--out", "-o", help="Result JSON path")
    p.add_argument("--no-timing", action="store_true", help="Omit stage timings from the result")
    _add_instance_flags(p)
    _add_tolerance_flags(p)
    p.set_defaults(handler=cmd_recover)

    p = sub.add_parser("verify", help="Run an exhaustive oracle check")
    p.add_argument("--matrix", required=True, help="Matrix file")
    p.add_argument("--t", type=int, help="Signal sparsity (default from the matrix)")
    p.add_argument("--l", type=int, help="Gross errors (default from the matrix)")
    p.add_argument("--check", choices=CHECKS, default='cs')
    p.add_argument("--cap", type=int, default=ENUMERATION_CAP, help="Enumeration cap")
    p.add_argument("--D", type=int, help="Support size for lambda/delta (default 2t)")
    p.add_argument("--samples", type=int, default=1000, help="Pairs for the pairwise check")
    p.add_argument("--epsilon", type=float, default=1e-3, help="Noise bound for the proximity check")
    p.add_argument("--trials", type=int, default=100, help="Trials for the proximity check")
    p.add_argument("--seed", type=int, default=0, help="Random seed")
    p.add_argument("--drop-row", type=int, help="Delete this row of H before checking")
    p.add_argument("--out", "-o", help="Report JSON path")
    _add_tolerance_flags(p)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("bench", help="Recovery trials over a sweep of n")
    p.add_argument("--n-list", required=True, help="Comma separated signal lengths")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--variant", default='generic', help="generic, cyclic or generic,cyclic")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--workers", type=int, default=1, help="Threads per batch")
    p.add_argument("--out", "-o", default="bench.csv", help="Bench CSV path")
    p.add_argument("--no-timing", action="store_true", help="Leave decode_micros blank")
    p.add_argument("--excel", help="Also write an Excel workbook")
    p.add_argument("--plot", help="Also write an HTML chart")
    _add_instance_flags(p)
    _add_tolerance_flags(p)
    p.set_defaults(handler=cmd_bench)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO)
    try:
        return args.handler(args)
    except EnumerationCapExceeded as exc:
        print(f"❌ {exc}", file=sys.stderr)
        return EXIT_CAP
    except DecodingFailure as exc:
        print(f"❌ Decoding failed [{exc.stage}]: {exc.diagnostic}", file=sys.stderr)
        return EXIT_FAILURE
    except (InvalidSpecError, DimensionMismatch, FileNotFoundError, ValueError) as exc:
        print(f"❌ {exc}", file=sys.stderr)
        return EXIT_USAGE
