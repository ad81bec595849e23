"""Finite directed posets: the index sets of every coherent net."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Iterator

from .errors import EmptyPoset, NotAntisymmetric, NotDirected, UnknownElement

Label = Hashable


@dataclass(frozen=True, eq=False)
class DirectedPoset:
    """A finite directed poset.

    ``elements`` keeps the input order, which fixes every downstream matrix
    layout.  ``leq`` is the full reflexive-transitive relation.  Instances
    should be built with :func:`validate_poset`.
    """

    elements: tuple
    leq: frozenset
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {e: i for i, e in enumerate(self.elements)})

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, item):
        return item in self._index

    def __eq__(self, other):
        if not isinstance(other, DirectedPoset):
            return NotImplemented
        return self.elements == other.elements and self.leq == other.leq

    def __hash__(self):
        return hash((self.elements, self.leq))

    def index(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownElement(f"{label!r} is not an element of the poset") from None

    def le(self, a, b) -> bool:
        return (a, b) in self.leq

    def pairs(self) -> Iterator[tuple]:
        """All comparable pairs ``(lam, mu)`` with ``lam <= mu``, in element order."""
        for a in self.elements:
            for b in self.elements:
                if (a, b) in self.leq:
                    yield a, b

    def strict_pairs(self) -> Iterator[tuple]:
        for a, b in self.pairs():
            if a != b:
                yield a, b

    def upper_bounds(self, *labels) -> list:
        for lab in labels:
            self.index(lab)
        return [u for u in self.elements if all((lab, u) in self.leq for lab in labels)]

    def common_upper(self, a, b):
        """First common upper bound in element order."""
        return self.upper_bounds(a, b)[0]

    @property
    def top(self):
        return maximum(self)


def _closure(elements: tuple, pairs: Iterable) -> set:
    idx = {e: i for i, e in enumerate(elements)}
    n = len(elements)
    reach = [[i == j for j in range(n)] for i in range(n)]
    for a, b in pairs:
        for lab in (a, b):
            if lab not in idx:
                raise UnknownElement(f"{lab!r} appears in the relation but not among the elements")
        reach[idx[a]][idx[b]] = True
    for k in range(n):
        rk = reach[k]
        for i in range(n):
            if reach[i][k]:
                ri = reach[i]
                for j in range(n):
                    if rk[j]:
                        ri[j] = True
    return {(elements[i], elements[j]) for i in range(n) for j in range(n) if reach[i][j]}


def validate_poset(elements: Iterable, leq_pairs: Iterable = ()) -> DirectedPoset:
    """Close ``leq_pairs`` reflexively and transitively and check directedness.

    Raises
    ------
    EmptyPoset, NotAntisymmetric, NotDirected, UnknownElement
    """
    elements = tuple(elements)
    if not elements:
        raise EmptyPoset("a poset needs at least one element")
    if len(set(elements)) != len(elements):
        raise ValueError("poset labels must be distinct")
    rel = _closure(elements, [tuple(p) for p in leq_pairs])
    for a, b in itertools.combinations(elements, 2):
        if (a, b) in rel and (b, a) in rel:
            raise NotAntisymmetric(a, b)
    for a, b in itertools.combinations(elements, 2):
        if not any((a, u) in rel and (b, u) in rel for u in elements):
            raise NotDirected(a, b)
    return DirectedPoset(elements, frozenset(rel))


def maximum(poset: DirectedPoset):
    for m in poset.elements:
        if all((e, m) in poset.leq for e in poset.elements):
            return m
    raise NotDirected(*poset.elements[:2])  # unreachable for validated posets


def branch(poset: DirectedPoset, mu) -> DirectedPoset:
    """The sub-poset ``{lam : lam <= mu}`` with the induced order."""
    poset.index(mu)
    elems = tuple(e for e in poset.elements if poset.le(e, mu))
    rel = frozenset((a, b) for (a, b) in poset.leq if a in elems and b in elems)
    return DirectedPoset(elems, rel)


def product_poset(p: DirectedPoset, q: DirectedPoset) -> DirectedPoset:
    """Componentwise order on ``p x q``; labels are pairs, left factor major."""
    elems = tuple((a, b) for a in p.elements for b in q.elements)
    rel = frozenset(
        ((a, b), (c, d))
        for (a, c) in p.pairs()
        for (b, d) in q.pairs()
    )
    return DirectedPoset(elems, rel)


def chain(*labels) -> DirectedPoset:
    """Convenience: the chain ``labels[0] <= labels[1] <= ...``."""
    return validate_poset(labels, zip(labels, labels[1:]))


def label_str(label) -> str:
    if isinstance(label, tuple):
        return "(" + ",".join(label_str(x) for x in label) + ")"
    return str(label)


def poset_to_json(poset: DirectedPoset) -> dict:
    cover = [
        [label_str(a), label_str(b)] for a, b in poset.strict_pairs()
    ]
    return {"elements": [label_str(e) for e in poset.elements], "leq": cover}


def poset_from_json(data: dict) -> DirectedPoset:
    return validate_poset(data["elements"], [tuple(p) for p in data.get("leq", [])])
