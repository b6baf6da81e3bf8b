"""Candidate-term libraries: (power of u) x (pure derivative of u).

A library is an ordered list of term descriptors plus the order of the
time-derivative left-hand side.  Evaluation turns each descriptor into a grid
array, trims every array to the common stencil-complete interior, and pairs
them with the evaluated LHS time derivative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .deriv import DiffConfig, differentiate
from .field import Field, FieldError, trim_interior

_SUBSCRIPT = {"x": "x", "y": "y", "z": "z", "t": "t"}


@dataclass(frozen=True)
class TermDescriptor:
    """One candidate term u^p * d^o u / d(axis)^o.  order 0 means no derivative."""

    u_power: int
    axis: str | None = None
    order: int = 0

    def __post_init__(self):
        if not 0 <= self.u_power <= 3:
            raise ValueError("u_power must be 0..3")
        if not 0 <= self.order <= 4:
            raise ValueError("derivative order must be 0..4")
        if (self.order == 0) != (self.axis is None):
            raise ValueError("axis must be given exactly when order > 0")

    @property
    def name(self) -> str:
        parts = []
        if self.u_power == 1:
            parts.append("u")
        elif self.u_power > 1:
            parts.append(f"u^{self.u_power}")
        if self.order > 0:
            parts.append(f"u_{_SUBSCRIPT[self.axis] * self.order}")
        if not parts:
            return "1"
        return "*".join(parts)


def parse_term(name_or_obj) -> TermDescriptor:
    """Descriptor from the JSON schema {"u_power": p, "axis": a, "order": o}."""
    d = name_or_obj
    return TermDescriptor(
        u_power=int(d.get("u_power", 0)),
        axis=d.get("axis"),
        order=int(d.get("order", 0)),
    )


@dataclass(frozen=True)
class LibrarySpec:
    terms: tuple[TermDescriptor, ...]
    lhs_order: int = 1

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.lhs_order not in (1, 2):
            raise ValueError("lhs_order must be 1 or 2")
        if len(set(self.terms)) != len(self.terms):
            raise ValueError("duplicate term descriptors in library")

    @property
    def names(self) -> list[str]:
        return [t.name for t in self.terms]

    def index_of(self, name: str) -> int:
        return self.names.index(name)


def standard_library(spatial_dims: int, lhs_order: int = 1) -> LibrarySpec:
    """The standard 19/20/20-term candidate libraries for 1/2/3 spatial dims."""
    if spatial_dims == 1:
        terms = [TermDescriptor(p) for p in (1, 2, 3)]
        for order in (1, 2, 3, 4):
            for p in (0, 1, 2, 3):
                terms.append(TermDescriptor(p, "x", order))
    elif spatial_dims == 2:
        terms = [TermDescriptor(1), TermDescriptor(2)]
        for ax in ("x", "y"):
            for order in (1, 2, 3):
                for p in (0, 1, 2):
                    terms.append(TermDescriptor(p, ax, order))
    elif spatial_dims == 3:
        terms = [TermDescriptor(1), TermDescriptor(2)]
        for ax in ("x", "y", "z"):
            for order in (1, 2):
                for p in (0, 1, 2):
                    terms.append(TermDescriptor(p, ax, order))
    else:
        raise ValueError("spatial_dims must be 1, 2 or 3")
    return LibrarySpec(tuple(terms), lhs_order=lhs_order)


@dataclass(frozen=True)
class EvaluatedLibrary:
    """Term fields and LHS field on a common stencil-complete interior grid."""

    descriptors: tuple[TermDescriptor, ...]
    term_fields: tuple[Field, ...]
    lhs_field: Field
    margins: tuple[tuple[int, int], ...]
    lhs_order: int = 1

    @property
    def names(self) -> list[str]:
        return [t.name for t in self.descriptors]


def evaluate_library(f: Field, spec: LibrarySpec, cfg: DiffConfig) -> EvaluatedLibrary:
    """Evaluate every library term and the LHS time derivative on f.

    Derivatives of u are taken first and nonlinear terms formed by pointwise
    multiplication with powers of the raw field afterwards.  All outputs are
    trimmed to the largest stencil margin used on each axis.
    """
    for t in spec.terms:
        if t.axis is not None and t.axis not in f.axis_labels:
            raise FieldError(f"library term {t.name} references absent axis {t.axis!r}")

    needed: set[tuple[str, int]] = {("t", spec.lhs_order)}
    for t in spec.terms:
        if t.order > 0:
            needed.add((t.axis, t.order))

    margin_by_axis = {lab: 0 for lab in f.axis_labels}
    deriv_fields: dict[tuple[str, int], Field] = {}
    for axis_lab, order in sorted(needed):
        res = differentiate(f, axis_lab, order, cfg)
        deriv_fields[(axis_lab, order)] = res.field
        margin_by_axis[axis_lab] = max(margin_by_axis[axis_lab], res.margin)

    margins = tuple(
        (margin_by_axis[lab], margin_by_axis[lab]) for lab in f.axis_labels
    )

    u_trim = trim_interior(f, margins)
    powers = {0: None, 1: u_trim.data}
    for p in (2, 3):
        if any(t.u_power == p for t in spec.terms):
            powers[p] = u_trim.data**p

    term_fields = []
    for t in spec.terms:
        if t.order == 0:
            arr = u_trim.data**t.u_power if t.u_power else np.ones(u_trim.dims)
        else:
            arr = trim_interior(deriv_fields[(t.axis, t.order)], margins).data
            if t.u_power:
                arr = powers[t.u_power] * arr
        term_fields.append(u_trim.with_data(np.ascontiguousarray(arr)))

    lhs_field = trim_interior(deriv_fields[("t", spec.lhs_order)], margins)
    return EvaluatedLibrary(
        descriptors=spec.terms,
        term_fields=tuple(term_fields),
        lhs_field=lhs_field,
        margins=margins,
        lhs_order=spec.lhs_order,
    )
