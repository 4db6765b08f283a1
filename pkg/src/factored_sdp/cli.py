"""Command-line harness around the solvers.

Subcommands: ``sensing`` (synthetic matrix-sensing benchmark), ``embed``
(ordinal embedding from a triplet file), ``gen-triplets`` (plant a
synthetic triplet dataset), ``constants`` (audit the convergence
constants of a sensing instance), and ``replay`` (re-run a saved
``run.json`` manifest).  Every run directory gets a manifest whose
``replay_argv`` reproduces the CSVs byte-for-byte: all derived defaults
(step sizes, inner-loop lengths, ranks) are resolved to explicit flag
values before the manifest is written, and output bytes never depend on
--jobs or the output path.

Exit codes: 0 success, 2 argument/input errors (including malformed
triplet lines, reported with their line number), 3 solver divergence
(partial CSVs are still written, with the divergence row marked by NaN
metrics).
"""

import argparse
import csv
import json
import math
import os
import statistics
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .init import init_perturbed_optimum, init_scheme3
from .linalg import gram, truncated_approx
from .objective import TripletProblem, estimate_smoothness, sensing_generate
from .solvers import (
    DivergedError,
    SolverConfig,
    run_fgd,
    run_projgd,
    run_sfgd,
    run_svrg,
)
from .stepsize import StepSchedule
from .theory import (
    compute_constants,
    constants_report_text,
    constants_rows,
    estimate_region_stats,
)

ALGORITHMS = ("fgd", "sfgd", "projgd", "svrg-fixed", "svrg-sbb0", "svrg-sbb")

FIXED_STEP_ALGOS = ("fgd", "projgd", "svrg-fixed")
BASE_STEP_ALGOS = ("sfgd", "svrg-sbb0", "svrg-sbb")

# Trial inits draw from their own seed stream. Offsetting keeps trial seed
# s from replaying the dataset seed's generator: with a shared seed the
# random init would reproduce the planted factor draw (same shape, same
# stream) and trial 0 would start at the solution.
INIT_SEED_OFFSET = 1_000_003


class CliError(ValueError):
    """Bad flag combination or input content; maps to exit code 2."""


class TripletFormatError(CliError):
    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class EmptyTestSet(RuntimeError):
    """test_error was asked to score an empty triplet set."""


def test_error(X, triplets):
    """Fraction of triplets (i, j, k) whose ordering d2_ij <= d2_ik fails.

    Ties count as violations, so the all-equal-distances Gram matrix
    (the identity) scores 1.0.
    """
    T = np.asarray(triplets, dtype=int)
    if T.ndim != 2 or T.shape[1] != 3 or T.shape[0] == 0:
        raise EmptyTestSet("need a nonempty (n, 3) triplet array")
    X = np.asarray(X, dtype=float)
    I, J, K = T[:, 0], T[:, 1], T[:, 2]
    d2_ij = X[I, I] + X[J, J] - X[I, J] - X[J, I]
    d2_ik = X[I, I] + X[K, K] - X[I, K] - X[K, I]
    return float(np.mean(d2_ij >= d2_ik))


def read_triplets(path, p=None):
    """Parse the triplet file format: ``i j k`` per line, ``#`` comments.

    Returns (triplets array, p).  When ``p`` is None it is inferred as
    max index + 1.  Malformed lines raise TripletFormatError carrying
    the 1-based line number.
    """
    triplets = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 3:
                raise TripletFormatError(
                    line_no, f"expected three indices, got {len(parts)} fields"
                )
            try:
                i, j, k = (int(part) for part in parts)
            except ValueError:
                raise TripletFormatError(line_no, f"non-integer index in {text!r}")
            if min(i, j, k) < 0:
                raise TripletFormatError(line_no, "negative index")
            if p is not None and max(i, j, k) >= p:
                raise TripletFormatError(
                    line_no, f"index {max(i, j, k)} out of range for p={p}"
                )
            if i == j or i == k or j == k:
                raise TripletFormatError(line_no, "indices must be pairwise distinct")
            triplets.append((i, j, k))
    if not triplets:
        raise TripletFormatError(0, "no triplets in file")
    T = np.asarray(triplets, dtype=int)
    return T, (p if p is not None else int(T.max()) + 1)


# ---------------------------------------------------------------------------
# output helpers


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def _write_manifest(out_dir, command, replay_argv):
    manifest = {"command": command, "replay_argv": list(replay_argv)}
    with open(os.path.join(out_dir, "run.json"), "w", encoding="utf-8") as fh:
        fh.write(json.dumps(manifest, indent=2, sort_keys=True))
        fh.write("\n")


def _write_plot_script(out_dir, algos, ylabel, logscale):
    lines = [
        "# gnuplot script for the curves.csv in this directory (data-only output;",
        "# render with: gnuplot -p plot.gp)",
        'set datafile separator ","',
        "set key outside",
        'set xlabel "epoch"',
        f'set ylabel "{ylabel}"',
    ]
    if logscale:
        lines.append("set logscale y")
    lines.append(f'algos = "{" ".join(algos)}"')
    lines.append(
        'plot for [i=1:words(algos)] "curves.csv" skip 1 \\\n'
        "  using 3:(strcol(1) eq word(algos,i) ? column(6) : 1/0) \\\n"
        "  with points pt 7 ps 0.4 title word(algos,i)"
    )
    with open(os.path.join(out_dir, "plot.gp"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _resolve_jobs(args_jobs):
    env = os.environ.get("FACTORED_SDP_THREADS")
    if env is not None:
        try:
            jobs = int(env)
        except ValueError:
            raise CliError(f"FACTORED_SDP_THREADS={env!r} is not an integer")
    else:
        jobs = args_jobs
    if jobs < 1:
        raise CliError("jobs must be at least 1")
    return jobs


def _run_parallel(trials, jobs):
    """Run the trial closures, preserving the input order of results."""
    if jobs == 1 or len(trials) <= 1:
        return [trial() for trial in trials]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(trial) for trial in trials]
        return [f.result() for f in futures]


# ---------------------------------------------------------------------------
# shared run machinery


def _parse_algos(text):
    algos = [a.strip() for a in text.split(",") if a.strip()]
    if not algos:
        raise CliError("--algos needs at least one algorithm")
    for a in algos:
        if a not in ALGORITHMS:
            raise CliError(
                f"unknown algorithm {a!r}; choose from {', '.join(ALGORITHMS)}"
            )
    if len(set(algos)) != len(algos):
        raise CliError("--algos contains duplicates")
    return algos


def _per_algo_values(text, algos, flag):
    """One float broadcast to all algorithms, or a comma list matching --algos."""
    if text is None:
        return {}
    parts = text.split(",")
    try:
        values = [float(part) for part in parts]
    except ValueError:
        raise CliError(f"{flag} values must be numbers, got {text!r}")
    if len(values) == 1:
        values = values * len(algos)
    if len(values) != len(algos):
        raise CliError(
            f"{flag} needs one value or {len(algos)} comma-separated values"
        )
    return dict(zip(algos, values))


def _default_steps(L_hat, sigma1, n, family="sensing"):
    """Per-algorithm default step sizes from measured curvature and scale.

    ``base`` is the classic stability ceiling 1/(L sigma_1) for factored
    gradient steps, with sigma_1 the top eigenvalue of the reference (or
    initial) Gram matrix.  For the sensing family, stochastic algorithms
    shrink it by sqrt(n) because their per-sample directions are that much
    larger than the averaged gradient.  Triplet losses sit much closer to
    their stability edge (the Gram scale grows along the run), so the
    embedding family uses smaller fractions, calibrated on planted
    instances.  Defaults are starting points; benchmarks pass --eta/--eta0.
    """
    base = 1.0 / (L_hat * max(sigma1, 1e-12))
    if family == "embed":
        return {
            "fgd": 0.03 * base,
            "projgd": 0.5 / L_hat,
            "sfgd": 0.0015 * base,
            "svrg-fixed": 0.0015 * base,
            "svrg-sbb0": 0.001 * base,
            "svrg-sbb": 0.001 * base,
        }
    root_n = math.sqrt(n)
    return {
        "fgd": 0.25 * base,
        "projgd": 0.5 / L_hat,
        "sfgd": 0.25 * base / root_n,
        "svrg-fixed": 0.25 * base / root_n,
        "svrg-sbb0": 0.1 * base / root_n,
        "svrg-sbb": 0.1 * base / root_n,
    }


def _make_schedule(algo, eta_map, eta0_map, eps, m):
    if algo == "svrg-fixed":
        return StepSchedule("fixed", eta=eta_map[algo])
    if algo == "svrg-sbb0":
        return StepSchedule("sbb", eps=0.0, m=m, eta0=eta0_map[algo])
    if algo == "svrg-sbb":
        return StepSchedule("sbb", eps=eps, m=m, eta0=eta0_map[algo])
    raise CliError(f"no schedule for {algo!r}")


def _run_one(obj, algo, seed, U0, epochs, m, eval_every, eta_map, eta0_map,
             eps, t0, X_ref, U_ref, metric):
    """One (algorithm, seed) trial; divergence returns the marked record."""
    try:
        if algo in ("svrg-fixed", "svrg-sbb0", "svrg-sbb"):
            cfg = SolverConfig(algorithm=algo, r=U0.shape[1], epochs=epochs,
                               seed=seed, m=m, eval_every=eval_every,
                               schedule=_make_schedule(algo, eta_map, eta0_map, eps, m))
            return run_svrg(obj, cfg, U0, X_ref=X_ref, U_ref=U_ref, metric=metric)
        if algo == "fgd":
            cfg = SolverConfig(algorithm=algo, r=U0.shape[1], epochs=epochs,
                               seed=seed, eval_every=eval_every, eta=eta_map[algo])
            return run_fgd(obj, cfg, U0, X_ref=X_ref, U_ref=U_ref, metric=metric)
        if algo == "sfgd":
            cfg = SolverConfig(algorithm=algo, r=U0.shape[1], epochs=epochs,
                               seed=seed, eval_every=eval_every,
                               eta0=eta0_map[algo], t0=t0)
            return run_sfgd(obj, cfg, U0, X_ref=X_ref, U_ref=U_ref, metric=metric)
        if algo == "projgd":
            cfg = SolverConfig(algorithm=algo, r=U0.shape[1], epochs=epochs,
                               seed=seed, eval_every=eval_every, eta=eta_map[algo])
            return run_projgd(obj, cfg, gram(U0), X_ref=X_ref, metric=metric)
    except DivergedError as err:
        return err.record
    raise CliError(f"unknown algorithm {algo!r}")


def _curve_rows(records, with_error_cols=True, with_metric=False):
    rows = []
    for rec in records:
        for row in rec.rows:
            out = [rec.algorithm, rec.seed, row.epoch, row.eta, row.f]
            if with_error_cols:
                out.extend([row.error_X, row.error_U])
            if with_metric:
                out.append(row.metric)
            out.append(row.sample_grads)
            rows.append(out)
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    return rows


def _epochs_to_threshold(record, threshold):
    for row in record.rows:
        if row.error_X is not None and row.error_X <= threshold:
            return row.epoch
    return None


def _median(values):
    return float(statistics.median(values)) if values else None


# ---------------------------------------------------------------------------
# sensing


def cmd_sensing(args):
    algos = _parse_algos(args.algos)
    if args.r_star is None:
        args.r_star = args.r
    if args.n is None:
        args.n = 10 * args.p
    if args.r < 1 or args.r_star < 1 or args.r_star > args.p:
        raise CliError("need 1 <= r and 1 <= r_star <= p")
    obj = sensing_generate(args.p, args.r_star, args.n, args.instance_seed)
    if args.m is None:
        args.m = obj.n

    _, U_ref = truncated_approx(obj.Xstar, args.r)
    sigma1 = float(np.linalg.eigvalsh(obj.Xstar).max())
    L_hat, mu_hat = estimate_smoothness(
        obj,
        _probe_pairs(obj.p, args.r, seed=args.instance_seed + 1),
    )

    constants = compute_constants(
        L_hat, mu_hat, obj.Xstar, args.r,
        estimate_region_stats(
            obj, U_ref, 2.0 * (math.sqrt(2.0) - 1.0) / (3.0 * (L_hat / mu_hat)),
            n_samples=args.region_samples, seed=args.instance_seed,
        ),
    )

    defaults = _default_steps(L_hat, sigma1, obj.n)
    eta_map = {**defaults, **_per_algo_values(args.eta, algos, "--eta")}
    eta0_map = {**defaults, **_per_algo_values(args.eta0, algos, "--eta0")}
    if args.eps is None:
        args.eps = 0.02 * L_hat
    if args.t0 is None:
        args.t0 = float(obj.n)
    if args.init_radius is None:
        if math.isfinite(constants.gamma_u):
            args.init_radius = 0.5 * math.sqrt(constants.gamma_u)
        else:
            args.init_radius = 0.05 * float(np.linalg.norm(U_ref))

    seeds = list(range(args.seed_base, args.seed_base + args.seeds))
    trials = []
    for algo in algos:
        for seed in seeds:
            U0 = init_perturbed_optimum(U_ref, args.init_radius, INIT_SEED_OFFSET + seed)
            trials.append(
                lambda a=algo, s=seed, u=U0: _run_one(
                    obj, a, s, u, args.epochs, args.m, args.eval_every,
                    eta_map, eta0_map, args.eps, args.t0,
                    obj.Xstar, U_ref, None,
                )
            )
    records = _run_parallel(trials, _resolve_jobs(args.jobs))

    os.makedirs(args.out, exist_ok=True)
    _write_csv(
        os.path.join(args.out, "curves.csv"),
        ["algorithm", "seed", "epoch", "eta", "f", "error_X", "error_U",
         "sample_grads"],
        _curve_rows(records),
    )
    summary = []
    for algo in sorted(algos):
        recs = [r for r in records if r.algorithm == algo]
        hits = [_epochs_to_threshold(r, args.threshold) for r in recs]
        reached = [h for h in hits if h is not None]
        finals = [
            r.rows[-1].error_X for r in recs
            if r.rows and r.rows[-1].error_X is not None
            and math.isfinite(r.rows[-1].error_X)
        ]
        summary.append([
            algo, args.threshold, len(reached), len(recs),
            _median(reached), _median(finals),
        ])
    _write_csv(
        os.path.join(args.out, "summary.csv"),
        ["algorithm", "threshold", "seeds_reached", "seeds_total",
         "median_epochs_to_threshold", "median_final_error_X"],
        summary,
    )
    _write_csv(
        os.path.join(args.out, "constants.csv"),
        ["name", "value"],
        constants_rows(constants),
    )
    _write_plot_script(args.out, algos, "relative error ||X - X*||_F", True)
    _write_manifest(args.out, "sensing", [
        "sensing",
        "--p", str(args.p), "--r", str(args.r), "--r-star", str(args.r_star),
        "--n", str(args.n), "--m", str(args.m),
        "--instance-seed", str(args.instance_seed),
        "--epochs", str(args.epochs), "--eval-every", str(args.eval_every),
        "--seeds", str(args.seeds), "--seed-base", str(args.seed_base),
        "--algos", ",".join(algos),
        "--eta", ",".join(repr(eta_map[a]) for a in algos),
        "--eta0", ",".join(repr(eta0_map[a]) for a in algos),
        "--eps", repr(args.eps), "--t0", repr(args.t0),
        "--init-radius", repr(args.init_radius),
        "--threshold", repr(args.threshold),
        "--region-samples", str(args.region_samples),
    ])
    return 3 if any(r.diverged for r in records) else 0


def _probe_pairs(p, r, seed, n_pairs=8):
    rng = np.random.default_rng(seed)
    return [
        (gram(rng.standard_normal((p, r))), gram(rng.standard_normal((p, r))))
        for _ in range(n_pairs)
    ]


# ---------------------------------------------------------------------------
# embedding


def _split_triplets(triplets, split, seed):
    """Disjoint train/test partition with sizes within 1 of the ratio."""
    total = triplets.shape[0]
    n_train = int(round(split * total))
    n_train = min(max(n_train, 1), total)
    perm = np.random.default_rng(seed).permutation(total)
    return triplets[perm[:n_train]], triplets[perm[n_train:]]


def cmd_embed(args):
    algos = _parse_algos(args.algos)
    if not (0.0 < args.split <= 1.0):
        raise CliError("--split must be in (0, 1]")
    dim = args.dim if args.dim is not None else (args.r if args.r is not None else 2)
    if dim < 1:
        raise CliError("--dim must be at least 1")
    triplets, p = read_triplets(args.triplets, args.p)
    args.p = p
    if args.lam < 0:
        raise CliError("--lambda must be nonnegative")

    n_train_nominal = min(max(int(round(args.split * triplets.shape[0])), 1),
                          triplets.shape[0])
    if args.m is None:
        args.m = n_train_nominal

    probe_obj = TripletProblem(p, triplets, args.lam)
    L_hat, _ = estimate_smoothness(
        probe_obj, _probe_pairs(p, dim, seed=args.seed_base + 1)
    )
    defaults = _default_steps(L_hat, max(float(args.init_scale) ** 2, 1.0),
                              n_train_nominal, family="embed")
    eta_map = {**defaults, **_per_algo_values(args.eta, algos, "--eta")}
    eta0_map = {**defaults, **_per_algo_values(args.eta0, algos, "--eta0")}
    if args.eps is None:
        args.eps = 0.02 * L_hat
    if args.t0 is None:
        args.t0 = float(n_train_nominal)

    seeds = list(range(args.seed_base, args.seed_base + args.seeds))
    has_test = args.split < 1.0
    trials = []
    for seed in seeds:
        train, test = _split_triplets(triplets, args.split, seed)
        obj = TripletProblem(p, train, args.lam)
        metric = (lambda X, t=test: test_error(X, t)) if has_test else None
        U0 = init_scheme3(p, dim, args.init_scale, INIT_SEED_OFFSET + seed)
        for algo in algos:
            trials.append(
                lambda a=algo, s=seed, o=obj, u=U0, mt=metric: _run_one(
                    o, a, s, u, args.epochs, args.m, args.eval_every,
                    eta_map, eta0_map, args.eps, args.t0, None, None, mt,
                )
            )
    records = _run_parallel(trials, _resolve_jobs(args.jobs))

    os.makedirs(args.out, exist_ok=True)
    header = ["algorithm", "seed", "epoch", "eta", "f"]
    if has_test:
        header.append("test_error")
    header.append("sample_grads")
    _write_csv(
        os.path.join(args.out, "curves.csv"),
        header,
        _curve_rows(records, with_error_cols=False, with_metric=has_test),
    )
    summary = []
    for rec in records:
        row = [rec.algorithm, rec.seed, rec.rows[-1].f if rec.rows else None]
        if has_test:
            row.append(rec.rows[-1].metric if rec.rows else None)
        summary.append(row)
    summary.sort(key=lambda r: (r[0], r[1]))
    sum_header = ["algorithm", "seed", "final_f"]
    if has_test:
        sum_header.append("final_test_error")
    _write_csv(os.path.join(args.out, "summary.csv"), sum_header, summary)
    _write_plot_script(
        args.out, algos,
        "test error" if has_test else "training loss", False,
    )
    _write_manifest(args.out, "embed", [
        "embed",
        "--triplets", os.path.abspath(args.triplets),
        "--p", str(p), "--dim", str(dim),
        "--lambda", repr(args.lam), "--split", repr(args.split),
        "--m", str(args.m), "--epochs", str(args.epochs),
        "--eval-every", str(args.eval_every),
        "--seeds", str(args.seeds), "--seed-base", str(args.seed_base),
        "--init-scale", repr(args.init_scale),
        "--algos", ",".join(algos),
        "--eta", ",".join(repr(eta_map[a]) for a in algos),
        "--eta0", ",".join(repr(eta0_map[a]) for a in algos),
        "--eps", repr(args.eps), "--t0", repr(args.t0),
    ])
    return 3 if any(r.diverged for r in records) else 0


# ---------------------------------------------------------------------------
# triplet generation


def cmd_gen_triplets(args):
    if args.p < 3:
        raise CliError("--p must be at least 3")
    if args.count < 1:
        raise CliError("--count must be at least 1")
    if not (0.0 <= args.noise <= 1.0):
        raise CliError("--noise must be in [0, 1]")
    if args.dim < 1 or args.scale <= 0:
        raise CliError("need --dim >= 1 and --scale > 0")
    rng = np.random.default_rng(args.seed)
    points = rng.standard_normal((args.p, args.dim)) * args.scale

    lines = []
    emitted = 0
    while emitted < args.count:
        i, j, k = rng.integers(0, args.p, size=3)
        if i == j or i == k or j == k:
            continue
        d2_ij = float(np.sum((points[i] - points[j]) ** 2))
        d2_ik = float(np.sum((points[i] - points[k]) ** 2))
        if d2_ij == d2_ik:
            continue
        if d2_ij > d2_ik:
            j, k = k, j
        if args.noise > 0.0 and rng.uniform() < args.noise:
            j, k = k, j
        lines.append(f"{i} {j} {k}")
        emitted += 1

    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "triplets.txt"), "w", encoding="utf-8") as fh:
        fh.write(
            f"# planted triplets: p={args.p} dim={args.dim} count={args.count} "
            f"noise={repr(args.noise)} seed={args.seed} scale={repr(args.scale)}\n"
        )
        fh.write("\n".join(lines) + "\n")
    _write_csv(
        os.path.join(args.out, "points.csv"),
        [f"x{d}" for d in range(args.dim)],
        [list(map(float, row)) for row in points],
    )
    _write_manifest(args.out, "gen-triplets", [
        "gen-triplets",
        "--p", str(args.p), "--dim", str(args.dim),
        "--count", str(args.count), "--noise", repr(args.noise),
        "--seed", str(args.seed), "--scale", repr(args.scale),
    ])
    return 0


# ---------------------------------------------------------------------------
# constants audit


def cmd_constants(args):
    if args.r_star is None:
        args.r_star = args.r
    if args.n is None:
        args.n = 10 * args.p
    obj = sensing_generate(args.p, args.r_star, args.n, args.instance_seed)
    _, U_ref = truncated_approx(obj.Xstar, args.r)
    L_hat, mu_hat = estimate_smoothness(
        obj, _probe_pairs(obj.p, args.r, seed=args.instance_seed + 1)
    )
    constants = compute_constants(
        L_hat, mu_hat, obj.Xstar, args.r,
        estimate_region_stats(
            obj, U_ref, 2.0 * (math.sqrt(2.0) - 1.0) / (3.0 * (L_hat / mu_hat)),
            n_samples=args.region_samples, seed=args.instance_seed,
        ),
    )
    sys.stdout.write(constants_report_text(constants))
    if args.out is not None:
        os.makedirs(args.out, exist_ok=True)
        _write_csv(
            os.path.join(args.out, "constants.csv"),
            ["name", "value"],
            constants_rows(constants),
        )
        _write_manifest(args.out, "constants", [
            "constants",
            "--p", str(args.p), "--r", str(args.r),
            "--r-star", str(args.r_star), "--n", str(args.n),
            "--instance-seed", str(args.instance_seed),
            "--region-samples", str(args.region_samples),
        ])
    return 0


# ---------------------------------------------------------------------------
# replay


def cmd_replay(args):
    with open(args.manifest, encoding="utf-8") as fh:
        manifest = json.load(fh)
    argv = manifest.get("replay_argv")
    if (
        not isinstance(argv, list)
        or not argv
        or not all(isinstance(a, str) for a in argv)
        or argv[0] not in ("sensing", "embed", "gen-triplets", "constants")
    ):
        raise CliError(f"manifest {args.manifest!r} has no usable replay_argv")
    if argv[0] in ("constants", "gen-triplets"):
        return main(argv + ["--out", args.out])
    return main(argv + ["--out", args.out, "--jobs", str(args.jobs)])


# ---------------------------------------------------------------------------
# parser


def _add_common(sub, with_algos=True):
    sub.add_argument("--out", required=True, help="output directory")
    sub.add_argument("--seeds", type=int, default=1, help="number of trial seeds")
    sub.add_argument("--seed-base", type=int, default=0,
                     help="first trial seed; trial i uses seed-base + i")
    sub.add_argument("--jobs", type=int, default=1,
                     help="concurrent trials (FACTORED_SDP_THREADS overrides)")
    sub.add_argument("--epochs", type=int, default=100)
    sub.add_argument("--eval-every", type=int, default=1,
                     help="record metrics every this many epochs")
    if with_algos:
        sub.add_argument("--eta", default=None,
                         help="fixed step; one value or a comma list per --algos")
        sub.add_argument("--eta0", default=None,
                         help="initial/base step for sfgd and the adaptive "
                              "schedules; one value or a comma list")
        sub.add_argument("--eps", type=float, default=None,
                         help="stabilizer for svrg-sbb (default 0.02 * measured L)")
        sub.add_argument("--m", type=int, default=None,
                         help="inner-loop length (default: sample size)")
        sub.add_argument("--t0", type=float, default=None,
                         help="sfgd decay horizon (default: sample size; inf "
                              "freezes the step at eta0)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="factored-sdp",
        description="Low-rank factored solvers for stochastic semidefinite programs.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sensing = subs.add_parser("sensing", help="synthetic matrix-sensing benchmark")
    _add_common(sensing)
    sensing.add_argument("--p", type=int, default=100)
    sensing.add_argument("--r", type=int, default=5, help="solver rank")
    sensing.add_argument("--r-star", type=int, default=None,
                         help="planted rank (default: same as --r)")
    sensing.add_argument("--n", type=int, default=None,
                         help="number of measurements (default 10p)")
    sensing.add_argument("--instance-seed", type=int, default=0)
    sensing.add_argument("--init-radius", type=float, default=None,
                         help="Frobenius radius of the perturbed-optimum init")
    sensing.add_argument("--threshold", type=float, default=3e-6,
                         help="error_X level for the epochs-to-threshold summary")
    sensing.add_argument("--region-samples", type=int, default=64)
    sensing.add_argument(
        "--algos", default="svrg-fixed,svrg-sbb0,svrg-sbb",
        help=f"comma list from: {', '.join(ALGORITHMS)}",
    )
    sensing.set_defaults(func=cmd_sensing)

    embed = subs.add_parser("embed", help="ordinal embedding from a triplet file")
    _add_common(embed)
    embed.add_argument("--triplets", required=True, help="triplet file path")
    embed.add_argument("--p", type=int, default=None,
                       help="number of points (default: max index + 1)")
    embed.add_argument("--dim", type=int, default=None, help="embedding dimension")
    embed.add_argument("--r", type=int, default=None,
                       help="alias for --dim (default 2)")
    embed.add_argument("--lambda", dest="lam", type=float, default=1e-2,
                       help="trace regularization weight")
    embed.add_argument("--split", type=float, default=0.8,
                       help="train fraction; 1.0 disables the test columns")
    embed.add_argument("--init-scale", type=float, default=1.0)
    embed.add_argument(
        "--algos", default="svrg-sbb,sfgd,fgd",
        help=f"comma list from: {', '.join(ALGORITHMS)}",
    )
    embed.set_defaults(func=cmd_embed)

    gen = subs.add_parser("gen-triplets", help="plant a synthetic triplet dataset")
    gen.add_argument("--out", required=True, help="output directory")
    gen.add_argument("--p", type=int, default=50, help="number of points")
    gen.add_argument("--dim", type=int, default=2)
    gen.add_argument("--count", type=int, default=4000)
    gen.add_argument("--noise", type=float, default=0.0,
                     help="probability a triplet is emitted flipped")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--scale", type=float, default=1.0)
    gen.set_defaults(func=cmd_gen_triplets)

    consts = subs.add_parser("constants",
                             help="convergence-constant audit for a sensing instance")
    consts.add_argument("--out", default=None,
                        help="optional directory for constants.csv")
    consts.add_argument("--p", type=int, default=100)
    consts.add_argument("--r", type=int, default=5)
    consts.add_argument("--r-star", type=int, default=None)
    consts.add_argument("--n", type=int, default=None)
    consts.add_argument("--instance-seed", type=int, default=0)
    consts.add_argument("--region-samples", type=int, default=64)
    consts.set_defaults(func=cmd_constants)

    replay = subs.add_parser("replay", help="re-run a saved run.json manifest")
    replay.add_argument("manifest", help="path to a run.json")
    replay.add_argument("--out", required=True, help="fresh output directory")
    replay.add_argument("--jobs", type=int, default=1)
    replay.set_defaults(func=cmd_replay)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


def entrypoint():
    sys.exit(main(sys.argv[1:]))
