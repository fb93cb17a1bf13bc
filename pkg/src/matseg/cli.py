"""Command line interface: simulate, segment, correlogram and replicate."""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import io as mio
from .errors import (
    DegenerateColumn,
    DegenerateCovariance,
    DegenerateVariance,
    InvalidInput,
    InvalidState,
    MatsegError,
    NumericalFailure,
    ParseError,
    ResourceLimit,
)
from .estimators import pair_autocov_all
from .segmentation import (
    CvThreshold,
    FixedThreshold,
    NoThreshold,
    SegmentationConfig,
    _resolve_v_per_lag,
    _thresholded_pair_tensor,
    segment,
)
from .series import MatrixSeries, TensorSeries
from .simulation import gen_example, run_experiment
from .tensor import sequential_segment

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4

_DATA_ERRORS = (ParseError, InvalidInput, ResourceLimit, OSError)
_NUMERICAL_ERRORS = (
    NumericalFailure,
    DegenerateCovariance,
    DegenerateColumn,
    DegenerateVariance,
    InvalidState,
)


def _parse_threshold_spec(spec: str):
    """Validate a --threshold value; returns a template filled in with the seed later."""
    if spec == "none":
        return ("none",)
    if spec.startswith("fixed:"):
        parts = spec[len("fixed:") :].split(",")
        if len(parts) != 2:
            raise argparse.ArgumentTypeError(
                f"expected fixed:U,V, got {spec!r}"
            )
        try:
            u, v = float(parts[0]), float(parts[1])
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad fixed threshold values in {spec!r}")
        if u < 0 or v < 0:
            raise argparse.ArgumentTypeError("fixed threshold values must be nonnegative")
        return ("fixed", u, v)
    if spec == "cv" or spec.startswith("cv:"):
        if spec == "cv":
            return ("cv", 20)
        try:
            splits = int(spec[len("cv:") :])
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad split count in {spec!r}")
        if splits < 1:
            raise argparse.ArgumentTypeError("cv split count must be positive")
        return ("cv", splits)
    raise argparse.ArgumentTypeError(
        f"threshold must be none, fixed:U,V or cv[:N], got {spec!r}"
    )


def _parse_n_list(spec: str) -> list[int]:
    try:
        values = [int(tok) for tok in spec.split(",") if tok]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad length list {spec!r}")
    if not values or any(v < 2 for v in values):
        raise argparse.ArgumentTypeError(f"bad length list {spec!r}")
    return values


def _positive_int(tok: str) -> int:
    try:
        value = int(tok)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {tok!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {tok!r}")
    return value


def _threshold_mode(template, seed: int):
    if template[0] == "none":
        return NoThreshold()
    if template[0] == "fixed":
        return FixedThreshold(u=template[1], v=template[2])
    return CvThreshold(n_splits=template[1], seed=seed)


def _config_from_args(args) -> SegmentationConfig:
    return SegmentationConfig(
        k0=args.k0,
        m=args.m,
        c0=args.c0,
        ratio_shift=args.ratio_shift,
        threshold=_threshold_mode(args.threshold, args.seed),
        eps=args.eps,
    )


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--k0", type=int, default=2, help="lags in the eigen statistic")
    parser.add_argument("--m", type=int, default=10, help="largest lag for pair scores")
    parser.add_argument("--c0", type=float, default=0.75, help="ratio-rule search fraction")
    parser.add_argument(
        "--ratio-shift",
        type=float,
        default=None,
        help="additive stabilizer for the ratio rule (default: none)",
    )
    parser.add_argument(
        "--threshold",
        type=_parse_threshold_spec,
        default=("none",),
        help="none, fixed:U,V or cv[:N]",
    )
    parser.add_argument("--eps", type=float, default=1e-10, help="eigenvalue floor")


def _resolve_threads(value: int | None) -> int:
    if value is not None:
        return max(1, value)
    env = os.environ.get("MATSEG_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise InvalidInput(f"MATSEG_THREADS must be an integer, got {env!r}") from exc
    return os.cpu_count() or 1


def cmd_simulate(example: int, n: int, seed: int, out: str, truth_out: str | None = None) -> None:
    """Generate one simulated series and its truth sidecar."""
    rng = np.random.default_rng((int(seed), int(example), int(n)))
    series, truth = gen_example(example, n, rng)
    mio.write_series(out, series)
    mio.write_truth(truth_out if truth_out else out + ".truth", truth)


def cmd_segment(in_path: str, out_path: str, cfg: SegmentationConfig) -> None:
    """Segment a series file and write the result document."""
    series = mio.read_series(in_path)
    if isinstance(series, TensorSeries):
        results, _ = sequential_segment(series, cfg)
        doc = mio.result_document(cfg, mode_results=results)
    else:
        doc = mio.result_document(cfg, matrix_result=segment(series, cfg))
    mio.write_result(out_path, doc)


def _correlogram_rows(data: np.ndarray, m: int, v_per_lag) -> list[tuple[int, int, int, float]]:
    """Max absolute entry correlations for every unordered column pair and lag."""
    n = data.shape[0]
    transposed = MatrixSeries(np.swapaxes(data, 1, 2))
    q = transposed.p
    tensor0 = _thresholded_pair_tensor(
        pair_autocov_all(transposed, 0), None if v_per_lag is None else v_per_lag[0], 0
    )
    variances = tensor0[np.arange(q), np.arange(q)][
        :, np.arange(data.shape[1]), np.arange(data.shape[1])
    ]
    bad = np.argwhere(variances <= 0)
    if bad.size:
        i, a = bad[0]
        raise DegenerateVariance(int(i) + 1, int(a) + 1)
    scale = np.sqrt(variances)
    rows = []
    for h in range(0, m + 1):
        if h == 0:
            tensor = tensor0
        else:
            tensor = _thresholded_pair_tensor(
                pair_autocov_all(transposed, h),
                None if v_per_lag is None else v_per_lag[h],
                h,
            )
        denom = np.einsum("ia,jb->ijab", scale, scale)
        corr = np.abs(tensor / denom)
        peak = corr.max(axis=(2, 3))
        for i in range(q):
            for j in range(i, q):
                rows.append((i + 1, j + 1, h, float(max(peak[i, j], peak[j, i]))))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    return rows


def cmd_correlogram(
    in_path: str,
    out_path: str,
    m: int,
    threshold,
    gamma_path: str | None = None,
) -> None:
    """Write the per-pair maximal absolute correlations of a series."""
    series = mio.read_series(in_path)
    if not isinstance(series, MatrixSeries):
        raise InvalidInput("the correlogram command requires a matrix series")
    if m < 0 or m > series.n - 2:
        raise InvalidInput(f"m must satisfy 0 <= m <= n - 2, got {m}")
    data = series.data
    if gamma_path is not None:
        doc = mio.read_result(gamma_path)
        if doc.get("kind") != "matrix":
            raise InvalidInput("only matrix result documents carry a usable gamma")
        standardizer = np.asarray(doc["standardizer"], dtype=float)
        gamma = np.asarray(doc["gamma"], dtype=float)
        if standardizer.shape != (series.q, series.q) or gamma.shape != (series.q, series.q):
            raise InvalidInput("result document dimensions do not match the series")
        data = data @ standardizer @ gamma
    transposed = MatrixSeries(np.swapaxes(data, 1, 2))
    v_per_lag = _resolve_v_per_lag(transposed, threshold, m)
    mio.write_correlogram_csv(out_path, _correlogram_rows(data, m, v_per_lag))


def cmd_replicate(
    example: int,
    n_values: list[int],
    reps: int,
    cfg: SegmentationConfig,
    seed: int,
    threads: int,
    out_path: str,
) -> None:
    """Run replications and write the aggregate report."""
    report = run_experiment(example, n_values, reps, cfg, seed=seed, threads=threads)
    mio.write_report_csv(out_path, report)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matseg",
        description="Segment matrix- and tensor-valued time series into uncorrelated column groups.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a benchmark series")
    sim.add_argument("--example", type=int, required=True, choices=(1, 2, 3))
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", required=True)
    sim.add_argument("--truth-out", default=None)

    seg = sub.add_parser("segment", help="segment a series file")
    seg.add_argument("input")
    seg.add_argument("--out", required=True)
    seg.add_argument("--seed", type=int, default=0, help="seed for cross-validated thresholds")
    _add_config_flags(seg)

    cor = sub.add_parser("correlogram", help="per-pair maximal absolute correlations")
    cor.add_argument("input")
    cor.add_argument("--out", required=True)
    cor.add_argument("--m", type=int, default=10)
    cor.add_argument("--gamma", default=None, help="result document whose transformation to apply")
    cor.add_argument(
        "--threshold",
        type=_parse_threshold_spec,
        default=("none",),
        help="none, fixed:U,V or cv[:N]",
    )
    cor.add_argument("--seed", type=int, default=0)

    rep = sub.add_parser("replicate", help="replicate a benchmark scenario")
    rep.add_argument("--example", type=int, required=True, choices=(1, 2, 3))
    rep.add_argument("--n", type=_parse_n_list, required=True, help="comma-separated lengths")
    rep.add_argument("--reps", type=_positive_int, required=True)
    rep.add_argument("--seed", type=int, default=0)
    rep.add_argument("--threads", type=int, default=None)
    rep.add_argument("--out", required=True)
    _add_config_flags(rep)

    return parser


def _report_error(exc: Exception) -> None:
    record = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ParseError):
        record["line"] = exc.line
        record["reason"] = exc.reason
    print(json.dumps(record), file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            cmd_simulate(args.example, args.n, args.seed, args.out, args.truth_out)
        elif args.command == "segment":
            cmd_segment(args.input, args.out, _config_from_args(args))
        elif args.command == "correlogram":
            cmd_correlogram(
                args.input,
                args.out,
                args.m,
                _threshold_mode(args.threshold, args.seed),
                args.gamma,
            )
        elif args.command == "replicate":
            cmd_replicate(
                args.example,
                args.n,
                args.reps,
                _config_from_args(args),
                args.seed,
                _resolve_threads(args.threads),
                args.out,
            )
    except _NUMERICAL_ERRORS as exc:
        _report_error(exc)
        return EXIT_NUMERICAL
    except _DATA_ERRORS as exc:
        _report_error(exc)
        return EXIT_DATA
    except MatsegError as exc:
        _report_error(exc)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
