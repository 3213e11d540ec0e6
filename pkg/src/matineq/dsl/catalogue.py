"""Built-in statements and their native counterparts."""

from __future__ import annotations

from typing import Callable

from .. import inequalities as iq
from .ast import Statement
from .parser import parse

SOURCES: dict[str, str] = {
    "eq1": "0.5*A + 0.5*B >=loewner gm(A, B)",
    "eq2": "A + S*inv(A)*S >=loewner 2*S",
    "weyl-gm": "lam(A + B) >= 2*lam(gm(A, B))",
    "eq3": "lam(A + B) >= 2*sqrt(lam(A*B))",
    "eq4": "lam(A + B) >= 2*lam(sqrt(A)*sqrt(B))",
    "eq5": "lam(A+B) >= 2*sqrt(sig(A*B))",
    "eq7": "lam((1-t)*A + t*B) >= sig(A^(1-t) * B^t)",
    "eq8": "lam((1-t)*A + t*B) >= lam(A^(1-t) * B^t)",
    "conjecture": "lam((1-t)*A + t*B) >= sqrt(sig(A^(2*(1-t)) * B^(2*t)))",
}

# statements that need positive definite (not just semidefinite) bindings
PD_ONLY = frozenset({"eq1", "eq2", "weyl-gm"})


def builtin_catalogue() -> dict[str, Statement]:
    return {name: parse(src) for name, src in SOURCES.items()}


def bindings_for(name: str, A, B) -> dict:
    """Variable bindings under which ``name`` matches its native check on (A, B)."""
    if name == "eq2":
        return {"A": A, "S": B}
    return {"A": A, "B": B}


def _weighted(check: Callable) -> Callable:
    return lambda A, B, t, tol=None: check(iq.InequalityInstance(A, B, t), tol)


def _plain(check: Callable) -> Callable:
    return lambda A, B, t, tol=None: check(A, B, tol)


NATIVE: dict[str, Callable] = {
    "eq1": _plain(iq.check_amgm_loewner),
    "eq2": _plain(iq.check_amgm_variant),
    "weyl-gm": _plain(iq.check_weyl_gm),
    "eq3": _plain(iq.check_bk1),
    "eq4": _plain(iq.check_bk2),
    "eq5": _plain(iq.check_bkd),
    "eq7": _weighted(iq.check_ando),
    "eq8": _weighted(iq.check_prop4),
    "conjecture": _weighted(iq.check_conjecture),
}


def catalogue_file_text() -> str:
    lines = ["# built-in inequality catalogue; bind A and B (eq2 uses A and S)"]
    for name, src in SOURCES.items():
        lines.append(f"# {name}")
        lines.append(src)
    return "\n".join(lines) + "\n"
