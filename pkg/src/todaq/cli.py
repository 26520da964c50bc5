"""Command-line front end: exact identity suites, numeric evaluations, Hamiltonians.

Exit codes: 0 success, 1 usage error, 2 an identity or check failed,
3 a quadrature did not converge. Reports are newline-delimited JSON.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_QUAD = 0, 1, 2, 3
WORKERS_ENV = "TODAQ_WORKERS"

SUITES = ("factorization", "golden", "det", "kernels", "mn", "recursive", "limits")
# inclusive rank bounds per suite (desk-scale limits)
RANK_BOUNDS = {
    "factorization": (2, 8),
    "golden": (4, 4),
    "det": (2, 5),
    "kernels": (2, 6),
    "mn": (2, 5),
    "limits": (2, 6),
}
K_BOUNDS = (1, 3)
MUTATIONS = {
    "mn": ("M:corner-sign", "N:corner-sign"),
    "factorization": ("lax-coupling",),
    "det": ("drop-term",),
    "kernels": ("drop-term", "imaginary-kernel"),
    "recursive": ("no-counterterm",),
}


class UsageError(ValueError):
    pass


def load_catalogue() -> dict:
    """Static kernel catalogue shipped with the package."""
    with resources.files("todaq").joinpath("data/kernels.json").open() as fh:
        return json.load(fh)


# ----------------------------------------------------------------------------
# configuration

def parse_range(text: str) -> List[int]:
    """``'3'``, ``'2..5'`` or ``'2,4'`` to a list of integers."""
    try:
        if ".." in text:
            a, b = text.split("..")
            return list(range(int(a), int(b) + 1))
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise UsageError(f"bad range {text!r}") from None


def parse_floats(text: str) -> List[float]:
    try:
        return [float(t) for t in text.split(",") if t]
    except ValueError:
        raise UsageError(f"bad number list {text!r}") from None


def parse_grid(text: str) -> List[float]:
    """``'lo:hi:count'`` to an evenly spaced list."""
    try:
        lo, hi, k = text.split(":")
        return [float(v) for v in np.linspace(float(lo), float(hi), int(k))]
    except ValueError:
        raise UsageError(f"bad grid {text!r}; expected lo:hi:count") from None


def worker_count(flag: Optional[int]) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"{WORKERS_ENV} must be an integer") from None
    return max(1, flag or 1)


@dataclass
class RunConfig:
    """Validated selection for ``verify``.

    Attributes
    ----------
    suites : list of str
    ranks : list of int
    ks : list of int
        Lower ranks for the recursive suite.
    couplings : {'paper', 'symbolic', 'unit'}
    mutate : str or None
    out : str or None
    workers : int
    """

    suites: List[str]
    ranks: List[int] = field(default_factory=list)
    ks: List[int] = field(default_factory=lambda: [1, 2])
    couplings: str = "paper"
    mutate: Optional[str] = None
    out: Optional[str] = None
    workers: int = 1

    def validate(self) -> None:
        for s in self.suites:
            if s not in SUITES:
                raise UsageError(f"unknown suite {s!r}")
            if s in RANK_BOUNDS:
                lo, hi = RANK_BOUNDS[s]
                bad = [r for r in self.ranks_for(s) if not lo <= r <= hi]
                if bad:
                    raise UsageError(f"suite {s}: ranks {bad} outside {lo}..{hi}")
        if "recursive" in self.suites and any(not K_BOUNDS[0] <= k <= K_BOUNDS[1] for k in self.ks):
            raise UsageError(f"recursive: k outside {K_BOUNDS[0]}..{K_BOUNDS[1]}")
        if self.couplings not in ("paper", "symbolic", "unit"):
            raise UsageError(f"unknown coupling choice {self.couplings!r}")
        if self.mutate:
            if len(self.suites) != 1:
                raise UsageError("--mutate applies to a single suite")
            allowed = MUTATIONS.get(self.suites[0], ())
            if self.mutate.split("=")[0] not in allowed:
                raise UsageError(f"mutation {self.mutate!r} not available for {self.suites[0]}")

    def ranks_for(self, suite: str) -> List[int]:
        if suite == "golden":
            return [4]
        if self.ranks:
            return self.ranks
        return {"factorization": [2, 3, 4, 5], "det": [2, 3, 4], "kernels": [2, 3, 4],
                "mn": [2, 3], "limits": [2, 3, 4]}[suite]

    def jobs(self) -> List[Tuple[str, int, str, Optional[str]]]:
        out = []
        for s in self.suites:
            if s == "recursive":
                out += [(s, k, self.couplings, self.mutate) for k in self.ks]
            elif s == "kernels":
                for kern in load_catalogue()["kernels"]:
                    if kern["id"] == "recursive":
                        continue
                    out += [(f"kernels:{kern['id']}", r, self.couplings, self.mutate)
                            for r in self.ranks_for(s)]
            else:
                out += [(s, r, self.couplings, self.mutate) for r in self.ranks_for(s)]
        return out


# ----------------------------------------------------------------------------
# verify

def _couplings(choice: str, n: int):
    from .kernels import paper_couplings
    if choice == "paper":
        return paper_couplings(n)
    if choice == "unit":
        return {i: 1 for i in range(1, n + 2)}
    return None


def _mut_index(mutate: Optional[str], default: int = 0) -> int:
    if mutate and "=" in mutate:
        return int(mutate.split("=")[1])
    return default


def run_job(job: Tuple[str, int, str, Optional[str]]) -> dict:
    """Run one identity check; returns the report dictionary."""
    from . import kernels as K
    from . import lax
    from .laurent import GaussianRational, I
    suite, r, couplings, mutate = job
    if suite == "factorization":
        g = _couplings(couplings, r)
        g_lax = None
        if mutate == "lax-coupling":
            base = g if g is not None else {i: 1 for i in range(1, r + 2)}
            g_lax = dict(base)
            g_lax[1] = 3
        rep = lax.verify_factorization(r, g, g_lax=g_lax)
    elif suite == "golden":
        rep = golden_report()
    elif suite == "det":
        drop = _mut_index(mutate) if mutate else None
        rep = lax.verify_det_identity(r, _couplings(couplings, r), drop_term=drop)
    elif suite.startswith("kernels:"):
        kid = suite.split(":", 1)[1]
        entry = {k["id"]: k for k in load_catalogue()["kernels"]}[kid]
        F, left, right = getattr(K, entry["pair"])(r)
        c = GaussianRational(1)
        if mutate and mutate.startswith("drop-term"):
            F = F.with_term(_mut_index(mutate), 0)
        if mutate == "imaginary-kernel":
            c = I
        rep = K.verify_h2_intertwining(F, left, right, c=c, name=kid)
        if mutate:
            rep.notes.append(f"mutation: {mutate}")
    elif suite == "mn":
        rep = lax.verify_MN_intertwining(r, mutate=mutate)
    elif suite == "recursive":
        rep = K.verify_recursive_intertwining(r, counterterm=(mutate != "no-counterterm"))
        if mutate:
            rep.notes.append(f"mutation: {mutate}")
    elif suite == "limits":
        rep = lax.coupling_limit_kernels(r)
    else:
        raise UsageError(f"unknown suite {suite!r}")
    d = rep.to_dict()
    d["suite"] = suite
    return d


def golden_report():
    """Compare built n=4 matrices with the pinned canonical serialization."""
    from .lax import bound_twisted_a, build_R, build_Rstar
    from .reports import IdentityReport
    g = {i: 1 for i in range(1, 6)}
    Lx, _ = bound_twisted_a(4, g)
    built = {"L": Lx, "R": build_R(4, g).m, "R*": build_Rstar(4, g).m}
    with resources.files("todaq").joinpath("data/example_n4.json").open() as fh:
        pinned = json.load(fh)
    rep = IdentityReport("golden-example", 4, {f"g{i}": "1" for i in range(1, 6)})
    for name, m in built.items():
        for key, text in canonical_matrix(m).items():
            want = pinned[name].get(key, "0")
            if text != want:
                rep.passed = False
                rep.residuals[f"{name}[{key}]"] = f"built {text} | pinned {want}"
        for key in pinned[name]:
            if key not in canonical_matrix(m):
                rep.passed = False
                rep.residuals[f"{name}[{key}]"] = f"built 0 | pinned {pinned[name][key]}"
    return rep


def canonical_matrix(m) -> Dict[str, str]:
    return {f"{i},{j}": v.text() for (i, j), v in sorted(m.nonzero_entries().items())}


def _emit(records: Sequence[dict], out: Optional[str], fmt: str = "json") -> None:
    if fmt == "csv":
        buf = io.StringIO()
        keys = sorted({k for r in records for k in r})
        w = csv.DictWriter(buf, fieldnames=keys)
        w.writeheader()
        for r in records:
            w.writerow({k: (json.dumps(v) if isinstance(v, (list, dict)) else v) for k, v in r.items()})
        text = buf.getvalue()
    else:
        text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _map(fn: Callable, items: Sequence, workers: int) -> List:
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def cmd_verify(cfg: RunConfig) -> int:
    cfg.validate()
    results = _map(run_job, cfg.jobs(), cfg.workers)
    _emit(results, cfg.out)
    return EXIT_OK if all(r["pass"] for r in results) else EXIT_FAIL


# ----------------------------------------------------------------------------
# eval

def _eval_a1(args) -> List[dict]:
    from .quad import bessel_K_imag_order
    from .wavefunc import chi_a1
    out = []
    for nu in parse_floats(args.nu):
        for y in parse_floats(args.y):
            v = chi_a1(nu, y)
            k = bessel_K_imag_order(2 * nu, 2 * np.exp(y))
            r = v / k
            out.append({"check": "a1", "nu": nu, "y": y, "value_re": v.real, "value_im": v.imag,
                        "bessel": k, "ratio_re": r.real, "ratio_im": r.imag})
    return out


def _d2_point(task) -> dict:
    l1, l2, x21, x22, form, tol = task
    return __import__("todaq.wavefunc", fromlist=["psi_d2"]).psi_d2(
        l1, l2, x21, x22, form=form, tol=tol).to_record()


def _eval_d2(args, workers) -> List[dict]:
    l1, l2 = _lam(args, 2)
    g = parse_grid(args.grid)
    tasks = [(l1, l2, a, b, args.form, args.tol) for a in g for b in g]
    return _map(_d2_point, tasks, workers)


def _lam(args, n: int) -> List[float]:
    lam = parse_floats(args.lam)
    if len(lam) != n:
        raise UsageError(f"--lambda needs {n} values")
    return lam


def cmd_eval(args) -> int:
    from .quad import QuadratureError
    from . import wavefunc as W
    workers = worker_count(args.workers)
    try:
        if args.target == "a1":
            recs = _eval_a1(args)
            ok = True
        elif args.target == "d2":
            recs = _eval_d2(args, workers)
            ok = True
        elif args.target == "d2check":
            l1, l2 = _lam(args, 2)
            g = parse_grid(args.grid)
            rep = W.factorization_check(l1, l2, [(a, b) for a in g for b in g])
            recs, ok = [rep.to_dict()], rep.passed
        elif args.target == "dn":
            lam = parse_floats(args.lam)
            x = parse_floats(args.x)
            if args.n not in (2, 3) or len(lam) != args.n or len(x) != args.n:
                raise UsageError("dn needs n in {2,3} and n values for --lambda and --x")
            recs, ok = [W.psi_dn(args.n, lam, x, tol=args.tol).to_record()], True
        elif args.target == "eigen":
            l1, l2 = _lam(args, 2)
            x = parse_floats(args.x)
            if len(x) != 2:
                raise UsageError("--x needs 2 values")
            res = W.eigen_residual(args.operator, (l1, l2), tuple(x), fd_step=args.fd_step,
                                   quad_tol=args.tol if args.tol else 1e-9)
            recs, ok = [res.to_dict()], not res.degenerate
        else:
            raise UsageError(f"unknown target {args.target!r}")
    except QuadratureError as e:
        _emit([{"error": "quadrature", "message": str(e)}], args.out)
        return EXIT_QUAD
    _emit(recs, args.out, args.format)
    return EXIT_OK if ok else EXIT_FAIL


# ----------------------------------------------------------------------------
# hamiltonians

FAMILIES = {"D": "D", "C": "C", "twistedA": "TwistedA", "TwistedA": "TwistedA"}


def cmd_hamiltonians(args) -> int:
    from .lax import LaxSpec, build_L, char_hamiltonians
    if args.family not in FAMILIES:
        raise UsageError(f"unknown family {args.family!r}")
    n = args.rank
    if n < 2:
        raise UsageError("rank must be at least 2")
    g = None
    if args.couplings == "paper" and FAMILIES[args.family] == "TwistedA":
        from .kernels import paper_couplings
        g = paper_couplings(n)
    spec = LaxSpec.make(FAMILIES[args.family], n, g)
    ch = char_hamiltonians(build_L(spec))
    recs = [{"family": args.family, "rank": n, "k": k, "lambda_power": 2 * n - 2 * k,
             "h": ch.h(k, n).text()} for k in range(0, n + 1)]
    recs += [{"family": args.family, "rank": n, "u_power": j, "coefficient": c.text()}
             for j, c in sorted(ch.u_terms.items())]
    _emit(recs, args.out)
    return EXIT_OK


# ----------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="todaq", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    v = sub.add_parser("verify", help="run exact identity suites")
    v.add_argument("--suite", default="all", help=f"comma list of {', '.join(SUITES)} or 'all'")
    v.add_argument("--rank", default="", help="rank range, e.g. 2..5")
    v.add_argument("--k", default="1..2", help="lower ranks for the recursive suite")
    v.add_argument("--couplings", default="paper", help="paper, unit or symbolic")
    v.add_argument("--mutate", default=None, help="negative control, e.g. N:corner-sign")
    v.add_argument("--out", default=None)
    v.add_argument("--workers", type=int, default=None)

    e = sub.add_parser("eval", help="numeric wave functions and checks")
    e.add_argument("target", choices=["a1", "d2", "d2check", "dn", "eigen"])
    e.add_argument("--nu", default="0.5")
    e.add_argument("--y", default="0")
    e.add_argument("--lambda", dest="lam", default="0.3,0.7")
    e.add_argument("--grid", default="-1:1:3")
    e.add_argument("--form", default="twoD", choices=["twoD", "threeD"])
    e.add_argument("--x", default="0.2,-0.1")
    e.add_argument("--n", type=int, default=2)
    e.add_argument("--operator", default="quadratic", choices=["quadratic", "quartic"])
    e.add_argument("--fd-step", type=float, default=None)
    e.add_argument("--tol", type=float, default=None)
    e.add_argument("--format", default="json", choices=["json", "csv"])
    e.add_argument("--out", default=None)
    e.add_argument("--workers", type=int, default=None)

    h = sub.add_parser("hamiltonians", help="coefficients of det(L - lambda)")
    h.add_argument("--family", required=True)
    h.add_argument("--rank", type=int, required=True)
    h.add_argument("--couplings", default="symbolic", help="symbolic or paper (twisted family)")
    h.add_argument("--out", default=None)
    return p


_VALUE_FLAGS = {"--grid", "--x", "--y", "--nu", "--lambda", "--rank", "--k"}


def _join_negative_values(argv: Sequence[str]) -> List[str]:
    """``--grid -1:1:3`` to ``--grid=-1:1:3`` so argparse does not read a flag."""
    out: List[str] = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    p = build_parser()
    argv = _join_negative_values(sys.argv[1:] if argv is None else argv)
    try:
        args = p.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        if args.cmd == "verify":
            suites = list(SUITES) if args.suite == "all" else args.suite.split(",")
            cfg = RunConfig(suites, parse_range(args.rank) if args.rank else [],
                            parse_range(args.k), args.couplings, args.mutate, args.out,
                            worker_count(args.workers))
            return cmd_verify(cfg)
        if args.cmd == "eval":
            return cmd_eval(args)
        return cmd_hamiltonians(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
