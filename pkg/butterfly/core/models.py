from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field, field_validator, model_validator


class ForcingRound(BaseModel):
    """One simultaneous round: the forces applied and the colored set afterwards."""

    forces: list[tuple[int, int]]
    colored: list[int]


class ForcingTrace(BaseModel):
    """Round-by-round record of a zero forcing process."""

    initial: list[int]
    rounds: list[ForcingRound] = Field(default_factory=list)
    final: list[int]
    pt: int | None = None
    forcing: bool = False

    @property
    def round_count(self) -> int:
        return len(self.rounds)


class Certificate(BaseModel):
    """Row ``target`` of A_r written as sum of rows in ``kplus`` minus rows in ``kminus``.

    Labels are the 1-based recursive vertex numbers.
    """

    r: int
    target: int
    kplus: tuple[int, ...] = ()
    kminus: tuple[int, ...] = ()

    @field_validator("kplus", "kminus")
    @classmethod
    def _sorted(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        return tuple(sorted(set(value)))

    @model_validator(mode="after")
    def _disjoint(self):
        if set(self.kplus) & set(self.kminus):
            raise ValueError(f"kplus and kminus overlap for target {self.target}")
        if self.target in self.kplus or self.target in self.kminus:
            raise ValueError(f"target {self.target} appears in its own combination")
        return self

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self.kplus) | frozenset(self.kminus)

    def translated(self, offset: int, r: int | None = None, target: int | None = None) -> "Certificate":
        return Certificate(
            r=self.r if r is None else r,
            target=self.target + offset if target is None else target,
            kplus=tuple(j + offset for j in self.kplus),
            kminus=tuple(j + offset for j in self.kminus),
        )


class CertificateBook(BaseModel):
    """Certificates for every row indexed by S^(r)."""

    r: int
    certs: list[Certificate] = Field(default_factory=list)

    @model_validator(mode="after")
    def _ordered(self):
        self.certs.sort(key=lambda cert: cert.target)
        return self

    @property
    def targets(self) -> list[int]:
        return [cert.target for cert in self.certs]

    def as_mapping(self) -> dict[int, Certificate]:
        return {cert.target: cert for cert in self.certs}

    def get(self, target: int) -> Certificate:
        for cert in self.certs:
            if cert.target == target:
                return cert
        raise KeyError(target)


class Lemma34Parts(BaseModel):
    """The four index sets combined into a top-band certificate, kept for display."""

    r: int
    i: int
    source_kplus: tuple[int, ...]
    source_kminus_prime: tuple[int, ...]
    k1_plus: tuple[int, ...]
    k1_minus: tuple[int, ...]
    k2_plus: tuple[int, ...]
    k2_minus: tuple[int, ...]


class PDReport(BaseModel):
    """Power domination status of a vertex set."""

    set: list[int]
    is_power_dominating: bool
    pt_of_closed_nbhd: int | None = None
    ppt_candidate: int | None = None

    @model_validator(mode="after")
    def _ppt_consistent(self):
        if self.is_power_dominating:
            if self.pt_of_closed_nbhd is None or self.ppt_candidate != 1 + self.pt_of_closed_nbhd:
                raise ValueError("ppt_candidate must equal 1 + pt(N[S])")
        return self


class SearchResult(BaseModel):
    """Outcome of an exhaustive minimum search."""

    value: int
    witness: list[int]
    lower_bound: int = 0
    candidates_checked: int = 0
    elapsed_seconds: float = 0.0
    minimum_witnesses: int | None = None
    pt: int | None = None
    ppt: int | None = None
    status: Literal["exact", "exploratory"] = "exact"


class CheckStep(BaseModel):
    """Single verification step."""

    description: str
    data: dict[str, Any] | None = None

    @property
    def ok(self) -> bool:
        return bool(self.data and self.data.get("status") == "ok")


class VerifyReport(BaseModel):
    """End-to-end check of n - Z = mr = rank for one order r."""

    r: int
    n: int
    s_size: int
    z_formula: int
    forcing_ok: bool
    pt_observed: int | None
    rank_per_field: dict[str, int] = Field(default_factory=dict)
    skipped_fields: list[str] = Field(default_factory=list)
    mr_formula: int
    rank_matches: bool
    cert_count: int = 0
    certs_ok: bool = False
    brute_force_z: int | None = None
    steps: list[CheckStep] = Field(default_factory=list)
    ok: bool = False

    @model_validator(mode="after")
    def _consistent(self):
        if self.rank_matches and any(v != self.mr_formula for v in self.rank_per_field.values()):
            raise ValueError("rank_matches set while a field rank differs from the formula")
        if self.forcing_ok and self.pt_observed is not None and self.pt_observed > 2 * self.r:
            raise ValueError("forcing_ok set while pt exceeds 2r")
        return self


def format_table(rows: list[dict[str, Any]]) -> str:
    """Render homogeneous dict rows as a fixed-width text table."""
    if not rows:
        return ""
    headers = list(rows[0].keys())
    cells = [[str(row.get(h, "")) for h in headers] for row in rows]
    widths = [max(len(h), *(len(c[k]) for c in cells)) for k, h in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for row in cells:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines)
