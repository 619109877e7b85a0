"""Command-line front end: ``qpkit <subcommand> ...``.

Results go to standard output as JSON (human text with ``--pretty``);
diagnostics go to standard error. Exit codes: 0 success, 1 a mathematical
check failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import CheckFailure, InputError, QPError
from .rings import GF, QQ, ring_from_name

EXIT_OK, EXIT_CHECK, EXIT_INPUT = 0, 1, 2

F0 = "x1*x2 + x2*x3 + x3*x1"
F1 = "x1*x2 + x2*x3 + x3*x1 + x1*x2*x3"
F0_AUG_WORDS = ["x1x2", "x1x3", "x2x1", "x2x3", "x1x2x1", "x1x3x2", "x2x1x2", "x1x2x1x2"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


# ---------------------------------------------------------------- input helpers


def _load_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _ring_override(data):
    name = data.get("ring") if isinstance(data, dict) else None
    return ring_from_name(name) if name else None


def _load_qp(path: str):
    from .pathalg import AlgElem, Potential
    from .quiver import Quiver

    data = _load_json(path)
    if not isinstance(data, dict) or "quiver" not in data or "potential" not in data:
        raise InputError("QP JSON needs 'quiver' and 'potential'")
    q = Quiver.from_json(data["quiver"])
    w = Potential.from_elem(AlgElem.from_json(q, data["potential"], _ring_override(data)))
    return q, w


def _load_quiver(path: str):
    from .quiver import Quiver

    data = _load_json(path)
    if isinstance(data, dict) and "quiver" in data:
        data = data["quiver"]
    return Quiver.from_json(data)


def _load_presentation(path: str, drop_one: bool):
    """A presentation ({'n', 'gens'}) or a series, turned into its Jacobi generators."""
    from .jacdim import IdealPresentation, jacobi_generators
    from .series import FreeSeries

    data = _load_json(path)
    if not isinstance(data, dict) or "n" not in data:
        raise InputError("expected a JSON object with 'n'")
    ring = _ring_override(data)
    if "gens" in data:
        return IdealPresentation.from_json(data, ring)
    f = FreeSeries.from_json(data, ring)
    f.degree_cap = 10**6
    return jacobi_generators(f, drop_one)


def _compute_ring(name: str, p: int | None):
    if name == "Q":
        return QQ
    if name == "Fp":
        return GF(p if p is not None else 2)
    return ring_from_name(name, p)


# ---------------------------------------------------------------- commands


def cmd_quiver_mutate(args):
    from .quiver import b_matrix, mutate_quiver

    q = _load_quiver(args.input)
    out = mutate_quiver(q, args.k)
    res = {"quiver": out.to_json(), "b_matrix": [list(row) for row in b_matrix(out).b]}
    return res, None


def cmd_qp_mutate(args):
    from .qpmutation import Matching, find_matching_for, mutate_qp

    q, w = _load_qp(args.input)
    if args.matching:
        m = Matching.from_json(_load_json(args.matching))
    else:
        m = find_matching_for(q, w, args.k)
        if m is None:
            raise InputError(f"no maximal matching at vertex {args.k} fits the potential")
    res = mutate_qp(q, w, args.k, m)
    out = {
        "quiver": res.quiver.to_json(),
        "potential": res.potential.to_json(),
        "matching": m.to_json(),
        "dual_matching": res.dual.dual_matching.to_json(),
    }
    return out, None


def _profiles(p, args):
    from .jacdim import check_prime_consistency, dimension_profile

    if args.ring == "both":
        pq = dimension_profile(p, args.r, QQ)
        pp = dimension_profile(p, args.r, GF(args.p))
        check_prime_consistency(pq, pp)
        return [pq, pp]
    return [dimension_profile(p, args.r, _compute_ring(args.ring, args.p))]


def cmd_jacdim(args):
    from .jacdim import build_Mr

    p = _load_presentation(args.file, not args.all_commutators)
    profs = _profiles(p, args)
    if args.dump_matrix:
        m = build_Mr(p, args.r + 1)
        try:
            with open(args.dump_matrix, "w", encoding="utf-8") as fh:
                m.dump(fh)
        except OSError as exc:
            raise InputError(f"cannot write {args.dump_matrix}: {exc.strerror}") from exc
    out = profs[0].to_json() if len(profs) == 1 else {"profiles": [x.to_json() for x in profs], "consistent": True}
    lines = [f"{x.to_json()['ring']}: d = {tuple(x.d)}  {_conclusion_text(x)}" for x in profs]
    return out, "\n".join(lines)


def _conclusion_text(prof) -> str:
    c = prof.to_json()["conclusion"]
    return f"finite, dim {c['dim']}" if c["finite"] else f"unknown (sum so far {c['sum_so_far']})"


def table_rows(r: int = 6):
    """The four (field, f) rows: Q and F_2 against f_0 and f_1."""
    from .jacdim import check_prime_consistency, dimension_profile, jacobi_generators
    from .series import FreeSeries

    rows = []
    for label, text in (("f0", F0), ("f1", F1)):
        p = jacobi_generators(FreeSeries.parse(text, n=3, degree_cap=10**6))
        pq = dimension_profile(p, r, QQ)
        p2 = dimension_profile(p, r, GF(2))
        check_prime_consistency(pq, p2)
        rows.append(("Q", label, pq))
        rows.append(("F2", label, p2))
    order = {("Q", "f0"): 0, ("Q", "f1"): 1, ("F2", "f0"): 2, ("F2", "f1"): 3}
    rows.sort(key=lambda t: order[(t[0], t[1])])
    return rows


def cmd_x7_table(args):
    rows = table_rows(args.r)
    out = {"r": args.r, "rows": [{"K": k, "f": f, "d": list(p.d), "conclusion": p.to_json()["conclusion"]} for k, f, p in rows]}
    head = "K   f   " + " ".join(f"d{s}" for s in range(args.r + 1))
    body = [f"{k:<3} {f:<3} " + " ".join(f"{x:>2}" for x in p.d) for k, f, p in rows]
    return out, "\n".join([head] + body)


def _p_coeffs(text: str) -> list:
    from .series import FreeSeries

    f = FreeSeries.parse(text, n=1, degree_cap=10**6)
    if f.uses_y:
        raise InputError("P must be a polynomial in x")
    if f.has_constant():
        raise InputError("P must have no constant term")
    deg = f.degree() or 0
    return [f.terms.get((0,) * m, 0) for m in range(1, deg + 1)]


def cmd_x7_verify(args):
    from .x7family import verify_nondegeneracy_round

    rep = verify_nondegeneracy_round(_p_coeffs(args.P), args.trunc, not args.no_quadratic)
    out = rep.to_json()
    lines = [f"{'ok  ' if c.passed else 'FAIL'} {c.name}" + (f" ({c.detail})" if c.detail else "") for c in rep.checks]
    for st, k, (i, j, a, b) in rep.two_cycles:
        lines.append(f"2-cycle between {i} and {j} after mutating {st} at {k}")
    lines.append(f"{'passed' if rep.passed else 'FAILED'} at truncation {rep.trunc}")
    return out, "\n".join(lines), (EXIT_OK if rep.passed else EXIT_CHECK)


def cmd_lattice_check(args):
    from .jacdim import dimension_profile, parse_word, transfer_to_primes

    p = _load_presentation(args.file, not args.all_commutators)
    if args.aug:
        words = _load_json(args.aug)
        if not isinstance(words, list):
            raise InputError("augmentation file must hold a JSON list of words")
    elif args.greedy:
        words = None
    else:
        words = F0_AUG_WORDS
    if words is not None:
        words = [parse_word(w, p.n) for w in words]
    tr = transfer_to_primes(p, args.r, words)
    out = tr.to_json()
    out["r"] = args.r
    checked, failed = [], []
    for q in args.primes:
        prof = dimension_profile(p, args.r, GF(q))
        rk = prof.ranks[args.r + 1]
        checked.append({"p": q, "rank": rk, f"d{args.r}": prof.d[args.r]})
        if q not in tr.bad_primes and (rk != tr.rank_q or prof.d[args.r] != 0):
            failed.append(q)
    out["checked_primes"] = checked
    out[f"d{args.r}_zero_for_primes_not_dividing_index"] = not failed
    lines = [
        f"rank over Q of M_{args.r + 1}: {tr.rank_q}",
        f"index of augmented lattice: {tr.index}",
        f"bad primes: {sorted(tr.bad_primes) or 'none'}",
    ] + [f"p = {c['p']}: rank {c['rank']}, d{args.r} = {c[f'd{args.r}']}" for c in checked]
    if failed:
        print(f"rank dropped at good primes {failed}", file=sys.stderr)
        return out, "\n".join(lines), EXIT_CHECK
    return out, "\n".join(lines)


def cmd_green_search(args):
    from .quiver import search_reddening

    res = search_reddening(_load_quiver(args.input), args.depth)
    text = (
        f"reddening sequence {list(res.sequence)}" if res.found else f"none within depth {res.explored_depth}"
    ) + f" ({res.states} states)"
    return res.to_json(), text


def cmd_graded_check(args):
    from .jacdim import GradedQP, InfiniteCertificate, graded_class_dimension, graded_infinite_check

    data = _load_json(args.input)
    g = GradedQP.from_json(data)
    ring = _ring_override(data)
    if ring is not None and ring != g.potential.ring:
        from .pathalg import Potential

        g.potential = Potential(g.quiver, g.potential.terms, g.potential.trunc, ring)
    res = graded_infinite_check(g)
    out = res.to_json()
    if isinstance(res, InfiniteCertificate):
        dims = {}
        for k in range(1, args.multiples + 1):
            d = k * res.degree
            dims[str(d)] = graded_class_dimension(g.quiver, g.degrees, res.relation_pairs(), d)
        out["class_dimensions"] = dims
        text = f"infinite-dimensional: cycles of degree {res.degree}; classes by degree {dims}"
    else:
        text = f"inconclusive: {res.reason}"
    return out, text


# ---------------------------------------------------------------- driver


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="qpkit", description="Quivers with potentials, mutation and Jacobian dimension checks.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text):
        sp = sub.add_parser(name, help=help_text, description=help_text)
        sp.add_argument("--pretty", action="store_true", help="human-readable output")
        sp.set_defaults(func=func)
        return sp

    sp = add("quiver-mutate", cmd_quiver_mutate, "Fomin-Zelevinsky mutation of a quiver")
    sp.add_argument("-i", "--input", required=True)
    sp.add_argument("-k", type=int, required=True)

    sp = add("qp-mutate", cmd_qp_mutate, "mutation of a quiver with potential along a matching")
    sp.add_argument("-i", "--input", required=True)
    sp.add_argument("-k", type=int, required=True)
    sp.add_argument("--matching", help="matching JSON; found automatically when omitted")

    sp = add("jacdim", cmd_jacdim, "dimension profile d_0..d_r of a quotient of the free series ring")
    sp.add_argument("-f", "--file", required=True, help="series JSON or presentation JSON with 'gens'")
    sp.add_argument("--ring", default="Q", help="Q, Fp (with --p), F<p> or both")
    sp.add_argument("--p", type=int, default=2)
    sp.add_argument("-r", type=int, default=6)
    sp.add_argument("--dump-matrix", metavar="PATH")
    sp.add_argument("--all-commutators", action="store_true", help="keep the redundant last commutator")

    sp = add("x7-table", cmd_x7_table, "profiles of f0 and f1 over Q and F2")
    sp.add_argument("-r", type=int, default=6)

    sp = add("x7-verify", cmd_x7_verify, "one round of the non-degeneracy checks for W_P on X7")
    sp.add_argument("--P", default="0", help="polynomial in x without constant term, e.g. 'x' or 'x - 2 x^2'")
    sp.add_argument("--trunc", type=int, default=12)
    sp.add_argument("--no-quadratic", action="store_true", help="drop the Delta_i Delta_j terms (negative control)")

    sp = add("lattice-check", cmd_lattice_check, "transfer d_r = 0 from Q to primes via a lattice index")
    sp.add_argument("-f", "--file", required=True)
    sp.add_argument("-r", type=int, default=5)
    grp = sp.add_mutually_exclusive_group()
    grp.add_argument("--aug", help="JSON list of augmentation words (default: the 8 words for f0 at r = 5)")
    grp.add_argument("--greedy", action="store_true", help="augment at the non-pivot columns instead")
    sp.add_argument("--primes", type=lambda s: [int(x) for x in s.split(",") if x], default=[3, 5, 7])
    sp.add_argument("--all-commutators", action="store_true")

    sp = add("green-search", cmd_green_search, "bounded search for a reddening sequence")
    sp.add_argument("-i", "--input", required=True)
    sp.add_argument("--depth", type=int, default=6)

    sp = add("graded-check", cmd_graded_check, "infinite-dimensionality certificate for a graded QP")
    sp.add_argument("-i", "--input", required=True)
    sp.add_argument("--multiples", type=int, default=2, help="count path classes in degrees k*cycle degree")
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        res = args.func(args)
    except InputError as exc:
        print(f"qpkit: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CheckFailure as exc:
        print(f"qpkit: check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except QPError as exc:
        print(f"qpkit: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out, text = res[0], res[1]
    code = res[2] if len(res) > 2 else EXIT_OK
    if args.pretty:
        print(text if text is not None else json.dumps(out, indent=2, sort_keys=True, ensure_ascii=False))
    else:
        print(json.dumps(out, sort_keys=True, ensure_ascii=False))
    return code


def main(argv=None) -> int:
    try:
        return run(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
