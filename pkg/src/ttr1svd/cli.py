"""``ttr1svd`` command-line front end.

Tensors and decompositions travel as JSON, tables and curves as CSV. Data
goes to stdout (or ``-o PATH``); diagnostics always go to stderr. Exit
status is 0 on success, 1 on bad arguments or input, 2 on numerical
failure.
"""
from __future__ import annotations

import argparse
import json
import os
import statistics
import sys
from typing import Optional, Sequence

import numpy as np

from . import analysis
from .complement import complement_basis, verify_complement
from .cp_als import cp_als, cp_error
from .decomposition import (
    FORMAT_TAG,
    approximation_error,
    decompose,
    decompose_pruned,
    decomposition_from_dict,
    dumps_decomposition,
    reconstruct,
    truncate_to_tolerance,
)
from .errors import ArgumentError, NumericalError
from .rank3 import construct_rank3, rank3_report
from .tensor import (
    DenseTensor,
    dumps_tensor,
    frobenius_norm,
    gaussian_tensor,
    inverse_sum_tensor,
    running_example,
    tensor_from_dict,
    tensor_to_dict,
)
from .tucker import to_tucker, tucker_to_dict

__all__ = ["main", "build_parser"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace("x", ",").split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


# -- I/O -------------------------------------------------------------------


def _read_json(path: str):
    if path == "-":
        text = sys.stdin.read()
        where = "stdin"
    else:
        if not os.path.isfile(path):
            raise ArgumentError(f"input file {path!r} does not exist")
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        where = path
    if not text.strip():
        raise ArgumentError(f"could not parse {where}: input is empty")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ArgumentError(f"could not parse {where}: {exc}") from exc


def _read_tensor(path: str) -> DenseTensor:
    return tensor_from_dict(_read_json(path))


def _read_decomposition(path: str):
    return decomposition_from_dict(_read_json(path))


def _write(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


# -- commands --------------------------------------------------------------


def cmd_gen(args) -> None:
    kind = args.kind
    params = args.params
    if kind == "running-example":
        if params:
            raise ArgumentError("running-example takes no parameters")
        t = running_example()
    elif kind == "inverse-sum":
        if len(params) not in (1, 2):
            raise ArgumentError("usage: gen inverse-sum N [D]")
        n = int(params[0])
        d = int(params[1]) if len(params) == 2 else 3
        t = inverse_sum_tensor(n, d)
    elif kind == "gaussian":
        if len(params) != 2:
            raise ArgumentError("usage: gen gaussian DIMS SEED (DIMS like 4,3,15)")
        t = gaussian_tensor(_int_list(params[0]), int(params[1]))
    else:
        raise ArgumentError(f"unknown generator {kind!r} (choose running-example, inverse-sum, gaussian)")
    _write(args, dumps_tensor(t))


def cmd_decompose(args) -> None:
    t = _read_tensor(args.input)
    if args.eps is not None:
        dec = decompose_pruned(t, args.eps, args.perm)
    else:
        dec = decompose(t, args.perm)
    _note(f"{len(dec)} terms, {dec.svd_count} SVDs, sigma_1 = {dec.sigmas[0]:.6g}" if len(dec) else "0 terms")
    _write(args, dumps_decomposition(dec))


def cmd_reconstruct(args) -> None:
    dec = _read_decomposition(args.input)
    t = reconstruct(dec, args.rank)
    _note(f"error bound from discarded terms: {approximation_error(dec, len(dec) if args.rank is None else args.rank):.3e}")
    _write(args, dumps_tensor(t))


def cmd_truncate(args) -> None:
    dec = _read_decomposition(args.input)
    R = truncate_to_tolerance(dec, args.eps)
    _note(f"R = {R}, error {approximation_error(dec, R):.4e} <= {args.eps:g}")
    _write(args, str(R))


def cmd_tucker(args) -> None:
    dec = _read_decomposition(args.input)
    td = to_tucker(dec, args.rank)
    _note(f"core {'x'.join(map(str, td.ranks))}, nnz {td.nnz} of {int(np.prod(td.ranks))}")
    _write(args, json.dumps(tucker_to_dict(td)))


def cmd_complement(args) -> None:
    t = _read_tensor(args.input)
    basis = complement_basis(t)
    rep = verify_complement(t, basis)
    _note(
        f"{len(basis.zero_weight_terms)} zero-weight + {len(basis.mixing_terms)} mixing = {rep.count} "
        f"(expected {rep.expected_count}); max |<A,B>|/|A| = {rep.max_inner:.2e}, max gram off-diagonal = {rep.max_gram_offdiag:.2e}"
    )
    out = {
        "count": rep.count,
        "expected_count": rep.expected_count,
        "max_inner": rep.max_inner,
        "max_gram_offdiag": rep.max_gram_offdiag,
        "elements": [dict(tensor_to_dict(e), kind=k) for e, k in zip(basis.elements(), basis.kinds())],
    }
    _write(args, json.dumps(out))


def cmd_rank3(args) -> None:
    if args.input is None:
        rep = rank3_report(args.trials, args.seed)
        _note(
            f"{rep.trials} trials: median relative error {rep.median_construction_error:.2e} "
            f"(CP-ALS {rep.median_cp_error:.2e}), degenerate {rep.degenerate_count}, max terms {rep.max_terms}"
        )
        _write(args, json.dumps(rep.to_dict()))
        return
    t = _read_tensor(args.input)
    res = construct_rank3(t)
    err = frobenius_norm(t - res.to_tensor())
    _note(f"{len(res.terms)} terms ({res.status}), error {err:.2e}")
    out = {
        "status": res.status,
        "error": err,
        "terms": [{"weight": r.weight, "mode_vectors": [v.tolist() for v in r.mode_vectors]} for r in res.terms],
    }
    _write(args, json.dumps(out))


def cmd_permscan(args) -> None:
    scan = analysis.permutation_scan(_read_tensor(args.input))
    _note(f"minimum term-count bound {scan.min_term_bound}")
    _write(args, analysis.permutation_csv(scan))


def cmd_deflate(args) -> None:
    steps = analysis.deflation_experiment(_read_tensor(args.input), args.iters, cp_rank=args.cp)
    _write(args, analysis.deflation_csv(steps))


def cmd_perturb(args) -> None:
    t = _read_tensor(args.input)
    std = np.sqrt(args.variance) if args.variance is not None else args.std
    if args.trials:
        res = analysis.perturbation_trials(t, args.trials, std, args.seed)
        _note(f"{res.trials} trials: {res.mirsky_violations} rss violations, {res.weyl_violations} per-index violations")
        _write(args, json.dumps(res.__dict__))
        return
    rng = np.random.default_rng(args.seed)
    rep = analysis.perturbation_report(t, DenseTensor(std * rng.standard_normal(t.shape)))
    out = {
        "e_frob": rep.e_frob,
        "e_spec": rep.e_spec,
        "per_index_dev": list(rep.per_index_dev),
        "rss_dev": rep.rss_dev,
        "weyl_bound": [{"branch_path": list(p), "bound": b} for p, b in rep.weyl_bound.items()],
        "delta_v_norms": [{"branch_path": list(p), "norms": list(n)} for p, n in rep.delta_v_norms.items()],
    }
    _write(args, json.dumps(out))


def cmd_cpals(args) -> None:
    t = _read_tensor(args.input)
    rows = []
    for s in range(args.seeds):
        cp = cp_als(t, args.rank, seed=s, max_iters=args.iters, tol=args.tol)
        rows.append((str(s), cp_error(t, cp), cp.iterations))
    med = statistics.median(r[1] for r in rows)
    lines = ["seed,error,iterations"] + [f"{s},{e!r},{n}" for s, e, n in rows] + [f"median,{med!r},"]
    _write(args, "\n".join(lines))


def cmd_trace(args) -> None:
    traces = analysis.intermediate_product_trace(_read_tensor(args.input))
    lines = ["term,branch_path,level,product"]
    for i, tr in enumerate(traces, start=1):
        path = "-".join(map(str, tr.branch_path))
        lines += [f"{i},{path},{lvl},{p!r}" for lvl, p in enumerate(tr.products, start=1)]
    _write(args, "\n".join(lines))


def cmd_svcurve(args) -> None:
    obj = _read_json(args.input)
    if isinstance(obj, dict) and obj.get("format") == FORMAT_TAG:
        dec = decomposition_from_dict(obj)
    else:
        dec = decompose(tensor_from_dict(obj))
    _write(args, analysis.curve_csv(analysis.sv_curve(dec)))


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ttr1svd", description="Orthogonal rank-1 tensor decompositions by a tree of SVDs.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def add(name, func, help_, input_=True, input_help="tensor JSON file, '-' for stdin"):
        sp = sub.add_parser(name, help=help_, description=help_)
        if input_:
            sp.add_argument("input", nargs="?", default="-", help=input_help)
        sp.add_argument("-o", "--output", help="write data here instead of stdout")
        sp.set_defaults(func=func)
        return sp

    sp = add("gen", cmd_gen, "write a built-in tensor", input_=False)
    sp.add_argument("kind", help="running-example | inverse-sum | gaussian")
    sp.add_argument("params", nargs="*", help="inverse-sum: N [D]; gaussian: DIMS SEED")

    sp = add("decompose", cmd_decompose, "TTr1 decomposition of a tensor")
    sp.add_argument("--eps", type=float, help="prune subtrees within this Frobenius error budget")
    sp.add_argument("--perm", type=_int_list, help="1-based index permutation, e.g. 2,3,1")

    dec_help = "decomposition JSON file, '-' for stdin"
    sp = add("reconstruct", cmd_reconstruct, "sum of the leading terms", input_help=dec_help)
    sp.add_argument("--rank", type=int, help="number of terms (default all)")

    sp = add("truncate", cmd_truncate, "smallest term count within an error bound", input_help=dec_help)
    sp.add_argument("--eps", type=float, required=True)

    sp = add("tucker", cmd_tucker, "Tucker form of the leading terms", input_help=dec_help)
    sp.add_argument("--rank", type=int, help="number of terms (default all)")

    add("complement", cmd_complement, "orthonormal basis of the tensors orthogonal to a 3-way tensor")

    sp = add("rank3", cmd_rank3, "three-term decomposition of a 2x2x2 tensor, or a random-ensemble report", input_=False)
    sp.add_argument("input", nargs="?", help="2x2x2 tensor JSON ('-' for stdin); omit for the report")
    sp.add_argument("--trials", type=int, default=100, help="report mode (no input): number of random tensors")
    sp.add_argument("--seed", type=int, default=0)

    add("permscan", cmd_permscan, "decompose under every index permutation (CSV)")

    sp = add("deflate", cmd_deflate, "repeatedly subtract the largest term (CSV)")
    sp.add_argument("--iters", type=int, default=5)
    sp.add_argument("--cp", action="store_true", help="also estimate the CP rank with CP-ALS")

    sp = add("perturb", cmd_perturb, "weight deviations under Gaussian noise")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--std", type=float, default=1e-6, help="noise standard deviation (default 1e-6)")
    g.add_argument("--variance", type=float, help="noise variance, an alternative to --std")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--trials", type=int, default=0, help="run this many seeded trials and count violations")

    sp = add("cpals", cmd_cpals, "CP-ALS errors per seed with the median (CSV)")
    sp.add_argument("--rank", type=int, required=True)
    sp.add_argument("--seeds", type=int, default=10)
    sp.add_argument("--iters", type=int, default=500)
    sp.add_argument("--tol", type=float, default=1e-10)

    add("trace", cmd_trace, "running singular value products along every branch (CSV)")
    add("svcurve", cmd_svcurve, "sorted weights of a decomposition or tensor file (CSV)", input_help="decomposition or tensor JSON, '-' for stdin")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except NumericalError as exc:
        _note(f"ttr1svd: numerical error: {exc}")
        return 2
    except (ArgumentError, ValueError) as exc:
        _note(f"ttr1svd: error: {exc}")
        return 1
    except OSError as exc:
        _note(f"ttr1svd: error: {exc}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
