"""Command-line surface: protocol demo, certification, bounds, verification.

Every subcommand accepts --seed <hex> (up to 128 bits) to fix all
randomness; identical argv with the same seed produces byte-identical
output, independent of --jobs, because Monte-Carlo trials draw from
per-trial seed streams.  --csv switches machine-readable output; floats
are printed with 12 significant digits.

Exit codes: 0 success, 1 validation error, 2 internal numerical failure.
"""

from __future__ import annotations

import argparse
import secrets
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import design, protocol, sampling, security
from .dense import NumericalError


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return "%.12g" % x
    return str(x)


def _emit(lines: list[str], out_path: str | None) -> None:
    payload = "\n".join(lines) + "\n"
    if out_path:
        with open(out_path, "w", newline="\n") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)


def _csv(header: list[str], rows: list[list]) -> list[str]:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return lines


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(1)


def _parse_seed(text: str | None) -> int:
    if text is None:
        seed = secrets.randbits(128)
        sys.stderr.write(f"note: generated seed {seed:032x}\n")
        return seed
    value = int(text, 16)
    if not 0 <= value < 1 << 128:
        raise ValueError("seed must fit in 128 bits")
    return value


def _parse_range(text: str) -> list[int]:
    """start:stop:step, inclusive start, exclusive stop; or a single int."""
    if ":" not in text:
        return [int(text)]
    parts = text.split(":")
    if len(parts) == 2:
        parts.append("1")
    if len(parts) != 3:
        raise ValueError(f"bad range {text!r}")
    start, stop, step = (int(p) for p in parts)
    if step <= 0:
        raise ValueError("range step must be positive")
    return list(range(start, stop, step))


def _uniform_prior(n: int) -> security.PriorDistribution:
    return security.PriorDistribution(n=n)


def _params_for(args, n: int) -> security.SecurityParams:
    if args.pmax is not None:
        p_max = args.pmax
    else:
        p_max = Fraction(1, 1 << n) if args.hmin_frac >= 1.0 \
            else 2.0 ** (-args.hmin_frac * n)
    M = args.M if args.M is not None else 1 << n
    if args.gamma is not None:
        gamma = args.gamma
    elif args.delta is not None:
        gamma = design.gamma_bound(args.delta)
    else:
        gamma = 2.0
    return security.SecurityParams(n=n, epsilon=args.eps, p_max=p_max,
                                   M=M, gamma=gamma)


# -- subcommand bodies ---------------------------------------------------------


def _cmd_keygen(args) -> None:
    rng = sampling.stream_rng(_parse_seed(args.seed), 0)
    key = protocol.keygen(args.K, rng)
    _emit([str(key.k)], args.out)


def _cmd_codebook(args) -> None:
    cb = protocol.build_codebook(args.n, args.K, args.delta,
                                 _parse_seed(args.seed),
                                 depth_factor=args.depth_factor)
    _emit(protocol.codebook_to_text(cb).splitlines(), args.out)


def _read(path: str) -> str:
    with open(path) as fh:
        return fh.read()


def _cmd_encrypt(args) -> None:
    cb = protocol.codebook_from_text(_read(args.codebook))
    cipher = protocol.encrypt(cb, protocol.SecretKey(args.key), args.x)
    _emit(protocol.cipher_to_text(cipher).splitlines(), args.out)


def _cmd_decrypt(args) -> None:
    cb = protocol.codebook_from_text(_read(args.codebook))
    cipher = protocol.cipher_from_text(_read(args.cipher))
    rng = sampling.stream_rng(_parse_seed(args.seed), 0)
    bits, deterministic = protocol.decrypt(cb, protocol.SecretKey(args.key),
                                           cipher, rng)
    _emit([f"{bits} deterministic={'true' if deterministic else 'false'}"],
          args.out)


def _make_sampler(args):
    if args.ensemble == "design":
        cfg = sampling.SamplerConfig(n=args.n, delta=args.delta,
                                     depth_factor=args.depth_factor)
        return lambda rng: sampling.sample_design_circuit(cfg, rng), "design"
    if args.ensemble == "uniform":
        return (lambda rng: sampling.sample_uniform_clifford(args.n, rng),
                "uniform")
    raise ValueError(f"unknown ensemble {args.ensemble!r}")


def _cmd_moments(args) -> None:
    rng = sampling.stream_rng(_parse_seed(args.seed), 0)
    if args.ensemble == "single-qubit":
        est = design.exhaustive_single_qubit_moments()
        label = "single-qubit-exhaustive"
    else:
        sampler, label = _make_sampler(args)
        alpha = beta = None
        if args.vector_mode == "BASIS":
            alpha = args.alpha if args.alpha else "0" * args.n
            beta = args.beta if args.beta else "0" * args.n
        est = design.estimate_moments(sampler, args.vector_mode, alpha, beta,
                                      args.samples, rng)
    row = design.moments_csv_row(label, est, args.delta, args.z)
    header = list(row)
    if args.csv:
        _emit(_csv(header, [[row[k] for k in header]]), args.out)
    else:
        _emit([f"{k} = {_fmt(row[k])}" for k in header], args.out)


def _cmd_gamma(args) -> None:
    rng = sampling.stream_rng(_parse_seed(args.seed), 0)
    if args.ensemble == "single-qubit":
        est = design.exhaustive_single_qubit_moments()
    else:
        sampler, _ = _make_sampler(args)
        est = design.estimate_moments(sampler, "BASIS", "0" * args.n,
                                      "0" * args.n, args.samples, rng)
    gamma = design.gamma_of(est)
    bound = design.gamma_bound(args.delta)
    d = est.d
    rows = [["gamma", float(gamma)],
            ["gamma_exact_2_design", 2.0 * d / (d + 1.0)],
            ["gamma_bound", bound]]
    if args.csv:
        _emit(_csv(["quantity", "value"], rows), args.out)
    else:
        _emit([f"{k} = {_fmt(v)}" for k, v in rows], args.out)


def _keylen_rows(args, ns: list[int]) -> list[list]:
    rows = []
    for n in ns:
        params = _params_for(args, n)
        exact, asym = security.key_length_bits(params)
        qotp, approx = security.comparison_rows(args.eps, n)
        rows.append([n, exact, asym, qotp, approx, args.hmin_frac, args.eps])
    return rows


def _cmd_keylen(args) -> None:
    params = _params_for(args, args.n)
    exact, asym = security.key_length_bits(params)
    kt = security.key_threshold(params)
    rows = [["n", args.n], ["epsilon", args.eps], ["h_min", params.h_min],
            ["log2_K_exact", exact], ["log2_K_asymptotic", asym],
            ["branch", kt.branch],
            ["P1_at_threshold", security.chernoff_p1(params, kt.k_min).bound],
            ["P2_at_threshold", security.maurer_p2(params, kt.k_min).bound]]
    if args.csv:
        _emit(_csv(["quantity", "value"], rows), args.out)
    else:
        _emit([f"{k} = {_fmt(v)}" for k, v in rows], args.out)


def _cmd_fig2(args) -> None:
    ns = _parse_range(args.n)
    header = ["n", "logK_exact", "logK_asymptotic", "qotp", "approx_otp",
              "hmin_frac", "epsilon"]
    rows = _keylen_rows(args, ns)
    if args.csv:
        _emit(_csv(header, rows), args.out)
    else:
        lines = ["  ".join(f"{h:>16s}" for h in header)]
        for row in rows:
            lines.append("  ".join(f"{_fmt(v):>16s}" for v in row))
        _emit(lines, args.out)


def _chernoff_chunk(payload):
    n, K, trials, seed, eps, delta, c, lo, hi = payload
    prior = _uniform_prior(n)
    report = security.empirical_chernoff(n, K, prior, trials, seed, eps,
                                         delta=delta, depth_factor=c,
                                         trial_indices=range(lo, hi))
    return report.trials


def _maurer_chunk(payload):
    n, K, x, trials, seed, tau, gamma, lo, hi = payload
    report = security.empirical_maurer(n, K, x, "0" * n, trials, seed, tau,
                                       gamma=gamma,
                                       trial_indices=range(lo, hi))
    return report.means


def _chunks(trials: int, jobs: int) -> list[tuple[int, int]]:
    size = (trials + jobs - 1) // jobs
    return [(lo, min(lo + size, trials)) for lo in range(0, trials, size)]


def _run_chunked(worker, payloads, jobs: int):
    if jobs <= 1:
        return [worker(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(worker, payloads))


def _cmd_verify_chernoff(args) -> None:
    seed = _parse_seed(args.seed)
    prior = _uniform_prior(args.n)
    params = security.SecurityParams.from_prior(prior, args.eps)
    K = args.K
    if K is None:
        import math
        K = math.ceil(security.chernoff_threshold(params))
    payloads = [(args.n, K, args.trials, seed, args.eps, args.delta,
                 args.depth_factor, lo, hi)
                for lo, hi in _chunks(args.trials, args.jobs)]
    trials = [t for chunk in _run_chunked(_chernoff_chunk, payloads, args.jobs)
              for t in chunk]
    freq = sum(t.violated for t in trials) / len(trials)
    p1 = security.chernoff_p1(params, K).bound
    header = ["trial", "lambda_max", "epsilon_hat", "violated"]
    rows = [[i, t.lambda_max, t.epsilon_hat, t.violated]
            for i, t in enumerate(trials)]
    summary = [f"K={K}", f"violation_freq={_fmt(freq)}", f"p1_bound={_fmt(p1)}"]
    if args.csv:
        _emit(_csv(header, rows) + [",".join(summary)], args.out)
    else:
        _emit(summary, args.out)


def _cmd_verify_maurer(args) -> None:
    seed = _parse_seed(args.seed)
    x = args.x if args.x else "0" * args.n
    d = 1 << args.n
    gamma = args.gamma if args.gamma is not None else 2.0 * d / (d + 1.0)
    payloads = [(args.n, args.K, x, args.trials, seed, args.tau, gamma, lo, hi)
                for lo, hi in _chunks(args.trials, args.jobs)]
    means = [m for chunk in _run_chunked(_maurer_chunk, payloads, args.jobs)
             for m in chunk]
    cut = (1.0 - args.tau) * 2.0 ** (-args.n) if args.tau > 0 else float("-inf")
    tail = sum(m < cut for m in means) / len(means)
    import math
    bound = math.exp(-args.K * args.tau ** 2 / (2.0 * gamma))
    summary = [f"K={args.K}", f"tau={_fmt(args.tau)}",
               f"gamma={_fmt(gamma)}", f"tail_freq={_fmt(tail)}",
               f"bound={_fmt(bound)}"]
    if args.csv:
        rows = [[i, m, m < cut] for i, m in enumerate(means)]
        _emit(_csv(["trial", "mean_overlap", "tail"], rows)
              + [",".join(summary)], args.out)
    else:
        _emit(summary, args.out)


def _cmd_lock_probe(args) -> None:
    seed = _parse_seed(args.seed)
    prior = _uniform_prior(args.n)
    d = 1 << args.n
    measurements = [security.Measurement.computational_basis(d)]
    rng = sampling.stream_rng(seed, 1)
    for i in range(args.bases):
        if i % 2 == 0:
            m = security.Measurement.clifford_basis(args.n, rng)
        else:
            m = security.Measurement.haar_basis(args.n, rng)
        m.label = f"{m.label}-{i}"
        measurements.append(m)
    report = security.locking_probe(args.n, args.K, prior, measurements,
                                    seed=seed, delta=args.delta,
                                    depth_factor=args.depth_factor,
                                    epsilon_reference=args.eps_ref)
    rows = [["holevo", report.holevo_bits]]
    rows += [[label, mi] for label, mi in report.mi_rows]
    rows.append(["gap", report.gap])
    if report.reference_2n_eps is not None:
        rows.append(["reference_2n_eps", report.reference_2n_eps])
    if args.csv:
        _emit(_csv(["quantity", "bits"], rows), args.out)
    else:
        _emit([f"{k} = {_fmt(v)}" for k, v in rows], args.out)


# -- parser -------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="qlock",
                     description="Clifford-circuit data locking toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True, out=True, csv=False):
        if seed:
            p.add_argument("--seed", help="hex master seed (<= 32 hex chars)")
        if out:
            p.add_argument("--out", help="write output to this path")
        if csv:
            p.add_argument("--csv", action="store_true")

    p = sub.add_parser("keygen", help="draw a uniform secret key")
    p.add_argument("--K", type=int, required=True)
    common(p)
    p.set_defaults(func=_cmd_keygen)

    p = sub.add_parser("codebook", help="derive and serialize a codebook")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--delta", type=float, default=0.0625)
    p.add_argument("--depth-factor", type=float, default=1.0)
    common(p)
    p.set_defaults(func=_cmd_codebook)

    p = sub.add_parser("encrypt", help="encrypt a plaintext bit string")
    p.add_argument("--codebook", required=True)
    p.add_argument("--key", type=int, required=True)
    p.add_argument("--x", required=True)
    common(p, seed=False)
    p.set_defaults(func=_cmd_encrypt)

    p = sub.add_parser("decrypt", help="decrypt a cipher file")
    p.add_argument("--codebook", required=True)
    p.add_argument("--key", type=int, required=True)
    p.add_argument("--cipher", required=True)
    common(p)
    p.set_defaults(func=_cmd_decrypt)

    for name in ("moments", "gamma"):
        p = sub.add_parser(name, help="estimate overlap moments")
        p.add_argument("--ensemble", choices=["design", "uniform",
                                              "single-qubit"],
                       default="design")
        p.add_argument("--n", type=int, default=2)
        p.add_argument("--delta", type=float, default=0.01)
        p.add_argument("--depth-factor", type=float, default=1.0)
        p.add_argument("--samples", type=int, default=10000)
        p.add_argument("--vector-mode", choices=["BASIS", "HAAR"],
                       default="BASIS")
        p.add_argument("--alpha")
        p.add_argument("--beta")
        p.add_argument("--z", type=float, default=3.0)
        common(p, csv=True)
        p.set_defaults(func=_cmd_moments if name == "moments" else _cmd_gamma)

    def bound_args(p):
        p.add_argument("--eps", type=float, default=1e-8)
        p.add_argument("--hmin-frac", type=float, default=1.0)
        p.add_argument("--pmax", type=float)
        p.add_argument("--M", type=int)
        p.add_argument("--gamma", type=float)
        p.add_argument("--delta", type=float)

    p = sub.add_parser("keylen", help="key-length bound for one n")
    p.add_argument("--n", type=int, required=True)
    bound_args(p)
    common(p, seed=False, csv=True)
    p.set_defaults(func=_cmd_keylen)

    p = sub.add_parser("fig2", help="key-length curves over a range of n")
    p.add_argument("--n", required=True, help="range start:stop:step")
    bound_args(p)
    common(p, seed=False, csv=True)
    p.set_defaults(func=_cmd_fig2)

    p = sub.add_parser("verify-chernoff",
                       help="Monte-Carlo check of the matrix concentration")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--K", type=int)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--delta", type=float, default=0.25)
    p.add_argument("--depth-factor", type=float, default=1.0)
    p.add_argument("--jobs", type=int, default=1)
    common(p, csv=True)
    p.set_defaults(func=_cmd_verify_chernoff)

    p = sub.add_parser("verify-maurer",
                       help="Monte-Carlo check of the lower-tail bound")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--x")
    p.add_argument("--gamma", type=float)
    p.add_argument("--jobs", type=int, default=1)
    common(p, csv=True)
    p.set_defaults(func=_cmd_verify_maurer)

    p = sub.add_parser("lock-probe",
                       help="Holevo quantity vs measured mutual information")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--K", type=int, default=16)
    p.add_argument("--bases", type=int, default=20)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--depth-factor", type=float, default=0.05)
    p.add_argument("--eps-ref", type=float)
    common(p, csv=True)
    p.set_defaults(func=_cmd_lock_probe)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except NumericalError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 2
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
