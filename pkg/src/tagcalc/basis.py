"""Basis table: measures and extractor/tag pairings.

The two built-in bases are the quadrature bases ``q`` and ``p``.  With

    <q|q'> = delta(q - q'),   <p|p'> = 2 pi delta(p - p'),
    <q|p> = exp(i q p),       <p|q> = exp(-i q p),

the resolved identity needs measure ``dq`` in ``q`` and ``dp/2pi`` in ``p``
so that every self pairing satisfies ``weight * scale == 1``.

Abstract unitary kernels ``U`` get their own basis ``qU`` whose tags are
related to the ``q`` tags by ``<q|U:eta> = U(q, eta)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from .coeff import Coeff, ONE, TWO_PI
from .errors import UnregisteredPairing
from .expr import Delta, Fn, Phase
from .linear import Lin

__all__ = ["PairingResult", "BasisTable", "default_table"]


@dataclass(frozen=True)
class PairingResult:
    """What ``<ext_basis:u| tag_basis:v>`` becomes.

    ``kind`` is ``"delta"`` (scale folded into the coefficient), ``"phase"``
    with ``sign`` meaning ``exp(sign i u v)``, or ``"unitary"`` naming a
    kernel; ``adjoint`` marks ``U*(v, u)`` instead of ``U(u, v)``.
    """

    kind: str
    scale: Coeff = ONE
    sign: int = 1
    name: str = ""
    adjoint: bool = False

    def atoms(self, u: Lin, v: Lin):
        """Return ``(coeff, atoms)`` for the contracted pair with arguments ``u``, ``v``."""
        if self.kind == "delta":
            return self.scale, [Delta(u - v)]
        if self.kind == "phase":
            return ONE, [Phase((u.to_poly() * v.to_poly()).scale(self.sign))]
        if self.kind == "unitary":
            if self.adjoint:
                return ONE, [Fn(self.name, (v, u), conjugated=True, unitary=True)]
            return ONE, [Fn(self.name, (u, v), unitary=True)]
        raise ValueError(self.kind)


@dataclass
class BasisTable:
    weights: dict = field(default_factory=dict)
    scales: dict = field(default_factory=dict)
    prefixes: dict = field(default_factory=dict)
    pairings: dict = field(default_factory=dict)
    unitaries: dict = field(default_factory=dict)  # name -> basis label
    reference: str = "q"

    def add_basis(self, label: str, weight: Coeff, scale: Coeff, prefixes):
        self.weights[label] = weight
        self.scales[label] = scale
        self.prefixes[label] = tuple(prefixes)
        self.pairings[(label, label)] = PairingResult("delta", scale=scale)

    def weight(self, basis: str) -> Coeff:
        try:
            return self.weights[basis]
        except KeyError:
            raise UnregisteredPairing(f"basis {basis!r} is not registered") from None

    def pairing(self, ext_basis: str, tag_basis: str) -> PairingResult:
        try:
            return self.pairings[(ext_basis, tag_basis)]
        except KeyError:
            raise UnregisteredPairing(
                f"no pairing registered for extractor basis {ext_basis!r} with tag basis {tag_basis!r}"
            ) from None

    def has_basis(self, basis: str) -> bool:
        return basis in self.weights

    def basis_for_prefix(self, name: str) -> str | None:
        """Basis whose variable prefixes match ``name`` (``q'``, ``p2``, ``etaU`` ...)."""
        stem = name.rstrip("'0123456789")
        best = None
        for label, prefixes in self.prefixes.items():
            for pre in prefixes:
                if stem == pre and (best is None or len(pre) > best[1]):
                    best = (label, len(pre))
        return best[0] if best else None

    def register_unitary(self, name: str, over: str = "q") -> str:
        """Register an abstract unitary kernel ``name`` relating a new basis to ``over``."""
        if name in self.unitaries:
            return self.unitaries[name]
        if self.weights[over] != ONE:
            raise UnregisteredPairing("unitary kernels are supported on unit-weight bases only")
        label = over + name
        self.add_basis(label, ONE, ONE, ["eta" + name])
        self.pairings[(over, label)] = PairingResult("unitary", name=name)
        self.pairings[(label, over)] = PairingResult("unitary", name=name, adjoint=True)
        self.unitaries[name] = label
        return label

    def unitary_basis(self, name: str) -> str:
        try:
            return self.unitaries[name]
        except KeyError:
            raise UnregisteredPairing(f"unitary kernel {name!r} is not registered") from None

    def validate(self) -> None:
        for label in self.weights:
            if self.weights[label] * self.scales[label] != ONE:
                raise ValueError(f"basis {label!r}: weight * delta scale != 1")
        for (a, b), res in self.pairings.items():
            if res.kind == "phase":
                back = self.pairings.get((b, a))
                if back is None or back.kind != "phase" or back.sign != -res.sign:
                    raise ValueError(f"pairings ({a},{b}) and ({b},{a}) are not conjugate")

    def copy(self) -> "BasisTable":
        return BasisTable(dict(self.weights), dict(self.scales), dict(self.prefixes),
                          dict(self.pairings), dict(self.unitaries), self.reference)


def default_table() -> BasisTable:
    t = BasisTable()
    t.add_basis("q", ONE, ONE, ["q", "x", "y", "nu", "mu", "xi", "s"])
    t.add_basis("p", TWO_PI.inverse(), TWO_PI, ["p", "k"])
    t.pairings[("q", "p")] = PairingResult("phase", sign=1)
    t.pairings[("p", "q")] = PairingResult("phase", sign=-1)
    t.register_unitary("U")
    t.validate()
    return t


DEFAULT = default_table()
