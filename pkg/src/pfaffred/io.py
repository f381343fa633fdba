"""System documents (JSON) and report documents.

A system document is a single JSON object:

    {
      "n": 2, "p": 3, "q": 1,
      "trunc_x": 8, "trunc_y": 8,
      "A_terms": [{"i": 0, "j": 0, "matrix": [["0","0"],["-1","0"]]}, ...],
      "B_terms": [...]
    }

Each term contributes matrix * x^i y^j to the series part of the
corresponding subsystem; rationals are strings "num/den" (or "num") and
are written in lowest terms.  Parsing round-trips losslessly.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction

from .errors import InvariantViolation, ParseError
from .matrices import SeriesMatrix
from .series import BiSeries
from .system import PfaffianSystem


def _rat(text, where):
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ParseError(f"rational must be a string: {text!r}", field=where)
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational {text!r}: {exc}", field=where) from None


def _rat_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}" if f.denominator != 1 else str(f.numerator)


def _nonneg_int(doc, key):
    v = doc.get(key)
    if not isinstance(v, int) or isinstance(v, bool) or v < 0:
        raise ParseError(f"{key} must be a nonnegative integer", field=key)
    return v


def _terms_to_matrix(terms, n, tx, ty, side):
    if not isinstance(terms, list):
        raise ParseError(f"{side} must be a list of terms", field=side)
    grids = [[{} for _ in range(n)] for _ in range(n)]
    for idx, term in enumerate(terms):
        where = f"{side}[{idx}]"
        if not isinstance(term, dict):
            raise ParseError("term must be an object", field=where)
        for key in ("i", "j"):
            v = term.get(key)
            if not isinstance(v, int) or isinstance(v, bool):
                raise ParseError(f"{key} must be an integer", field=where)
            if v < 0:
                raise ParseError(f"negative exponent {key}={v}", field=where)
        i, j = term["i"], term["j"]
        if i >= tx or j >= ty:
            raise ParseError(
                f"exponent ({i},{j}) outside the truncation window", field=where
            )
        mat = term.get("matrix")
        if (
            not isinstance(mat, list)
            or len(mat) != n
            or any(not isinstance(row, list) or len(row) != n for row in mat)
        ):
            raise ParseError(f"matrix must be {n}x{n}", field=where)
        for r in range(n):
            for c in range(n):
                val = _rat(mat[r][c], f"{where}.matrix[{r}][{c}]")
                if val:
                    cell = grids[r][c]
                    cell[(i, j)] = cell.get((i, j), Fraction(0)) + val
    # Document terms describe a polynomial exactly; the declared truncation
    # orders become the default working precision of derived computations.
    rows = [
        [BiSeries(grids[r][c], tx, ty, exact=True) for c in range(n)]
        for r in range(n)
    ]
    return SeriesMatrix.from_rows(rows)


def parse_document(doc: dict) -> PfaffianSystem:
    if not isinstance(doc, dict):
        raise ParseError("document must be a JSON object")
    n = _nonneg_int(doc, "n")
    if n < 1:
        raise ParseError("n must be positive", field="n")
    p = _nonneg_int(doc, "p")
    q = _nonneg_int(doc, "q")
    tx = _nonneg_int(doc, "trunc_x")
    ty = _nonneg_int(doc, "trunc_y")
    if tx < 1 or ty < 1:
        raise ParseError("truncation orders must be at least 1", field="trunc_x")
    amat = _terms_to_matrix(doc.get("A_terms", []), n, tx, ty, "A_terms")
    bmat = _terms_to_matrix(doc.get("B_terms", []), n, tx, ty, "B_terms")
    if p > 0 and amat.eval_zero_matrix("x").is_zero():
        raise InvariantViolation("A_terms have no x^0 part although p > 0")
    if q > 0 and bmat.eval_zero_matrix("y").is_zero():
        raise InvariantViolation("B_terms have no y^0 part although q > 0")
    return PfaffianSystem.make(n, p, q, amat, bmat)


def parse_system(path) -> PfaffianSystem:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ParseError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}", field=str(path)) from None
    return parse_document(doc)


def serialize_system(sys: PfaffianSystem) -> dict:
    tx, ty = sys.window
    # Exact entries may carry exponents beyond the nominal window; widen
    # the declared orders so the document round-trips.
    for mat in (sys.amat, sys.bmat):
        for e in mat.entries:
            for (i, j) in e.coeffs:
                tx = max(tx, i + 1)
                ty = max(ty, j + 1)

    def side(mat):
        terms = {}
        for r in range(sys.n):
            for c in range(sys.n):
                for (i, j), v in mat.at(r, c).coeffs.items():
                    terms.setdefault((i, j), {})[(r, c)] = v
        out = []
        for (i, j) in sorted(terms):
            grid = [
                [_rat_str(terms[(i, j)].get((r, c), Fraction(0)))
                 for c in range(sys.n)]
                for r in range(sys.n)
            ]
            out.append({"i": i, "j": j, "matrix": grid})
        return out

    return {
        "n": sys.n,
        "p": sys.p,
        "q": sys.q,
        "trunc_x": tx,
        "trunc_y": ty,
        "A_terms": side(sys.amat),
        "B_terms": side(sys.bmat),
    }


def write_system(sys: PfaffianSystem, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(serialize_system(sys), fh, indent=1, sort_keys=True)
        fh.write("\n")


def document_digest(doc: dict) -> str:
    canon = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()
