"""Citable topological input facts for the derivation engine.

A knowledge base is a validated table of facts about building blocks
(projective spaces, spheres, products of spheres): homotopy-sphere groups
Theta_n, concordance structure sets of the blocks, concordance inertia
groups, induced attaching-map data, hypothesis flags, and resolution hints.
Every fact carries a free-text citation.  Knowledge is data, not code:
extending the engine to a new block means adding records to a document,
never editing the engine.

Document format (one record per fact, blank-line separated, ``#`` comments):

    version: 1

    kind: Theta
    key: 8
    value: Z2
    cite: Kervaire-Milnor 1963

Unknown field names, duplicate (kind, key) pairs, unparsable values and
arithmetically inconsistent map facts are all load errors naming the
offending record.  See the README for the full value grammar.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from itertools import product as iter_product

from .abelian import (
    FgAbGroup,
    Homomorphism,
    IntMatrix,
    Presentation,
    canonical_form,
    direct_sum,
    hom_cokernel,
    hom_kernel,
)

__all__ = [
    "BlockId",
    "make_block",
    "parse_block",
    "skeleton_of",
    "KbFact",
    "MapFact",
    "ResolutionHint",
    "KnowledgeBase",
    "KbError",
    "InsufficientKnowledge",
    "RepresentativeDependence",
    "load",
    "load_file",
    "serialize",
    "default_kb",
    "parse_group",
    "format_group",
    "skeleton_group",
    "concordance_group",
    "attaching_fact",
    "all_surjections",
    "kernel_of_surjection_onto",
]

FAMILIES = ("CP", "HP", "OP", "S", "SxS")

KINDS = (
    "Theta",
    "ConcordanceSet",
    "InertiaC",
    "InertiaH",
    "SkeletonSet",
    "AttachingMap",
    "HighlyConnectedFlag",
    "OddCohomologyVanishes",
    "ResolutionHint",
    "ImageOverlap",
)


class KbError(Exception):
    """Schema violation, duplicate fact or failed consistency check."""


class InsufficientKnowledge(Exception):
    """A required fact is absent; never silently defaulted."""

    def __init__(self, kind: str, key: str, detail: str = ""):
        self.kind = kind
        self.key = key
        msg = f"no fact {kind}({key}) in the knowledge base"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class RepresentativeDependence(Exception):
    """Different representative surjections gave different kernel classes."""


# ---------------------------------------------------------------------------
# Building blocks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockId:
    """A building block: CPn, HPn, OP2, a sphere Sn, or a product SxSn."""

    family: str
    index: int

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.index < 1:
            raise ValueError("block index must be positive")
        if self.family == "OP" and self.index != 2:
            raise ValueError("octonionic blocks exist only as OP2 (OP1 is the sphere S8)")

    @property
    def dim(self) -> int:
        """Real dimension."""
        if self.family == "CP":
            return 2 * self.index
        if self.family == "HP":
            return 4 * self.index
        if self.family == "OP":
            return 16
        if self.family == "S":
            return self.index
        return 2 * self.index  # SxS

    def __str__(self) -> str:
        return f"{self.family}{self.index}"


def make_block(family: str, index: int) -> BlockId:
    """BlockId factory; OP1 is normalized to the sphere S8."""
    if family == "OP" and index == 1:
        return BlockId("S", 8)
    return BlockId(family, index)


_BLOCK_RE = re.compile(r"(SxS|CP|HP|OP|S)(\d+)$")


def parse_block(text: str) -> BlockId:
    m = _BLOCK_RE.fullmatch(text.strip())
    if not m:
        raise ValueError(f"cannot parse block {text!r}")
    return make_block(m.group(1), int(m.group(2)))


def skeleton_of(block: BlockId) -> BlockId | None:
    """The block one cell below, or None when the skeleton set is trivial
    (spheres) or not itself a block (products of spheres)."""
    if block.family == "CP" and block.index >= 2:
        return BlockId("CP", block.index - 1)
    if block.family == "HP" and block.index >= 2:
        return BlockId("HP", block.index - 1)
    if block.family == "OP":
        return BlockId("S", 8)
    return None


# ---------------------------------------------------------------------------
# Fact values
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MapFact:
    """Qualitative or explicit induced attaching-map data.

    The map goes from the concordance set of the key block into
    Theta_target.  Qualitative tags: trivial, mono, epi (with kernel), or
    an explicit image/kernel pair; explicit integer matrices are supported
    when both endpoint groups are known.
    """

    tag: str  # trivial | mono | epi | image_kernel | explicit
    target: int
    image: FgAbGroup | None = None
    kernel: FgAbGroup | None = None
    matrix: IntMatrix | None = None

    def kernel_class(self, domain: FgAbGroup) -> FgAbGroup:
        if self.tag == "trivial":
            return domain
        if self.tag == "mono":
            return FgAbGroup.trivial()
        if self.kernel is not None:
            return self.kernel
        raise InsufficientKnowledge("AttachingMap", "?", "kernel class not determined by the fact")

    def image_class(self, theta: FgAbGroup | None) -> FgAbGroup | None:
        if self.tag == "trivial":
            return FgAbGroup.trivial()
        if self.tag == "epi":
            return theta
        return self.image


@dataclass(frozen=True)
class ResolutionHint:
    """A constraint template instantiated at the expression multiplicity.

    `terms` are (cyclic order, k-coefficient, constant): the hinted group at
    multiplicity k is the direct sum of coeff*k+const copies of Z/order.
    """

    constraint: str  # only "quotient-of" is defined
    terms: tuple[tuple[int, int, int], ...]
    prime: int | None

    def instantiate(self, k: int) -> FgAbGroup:
        orders: list[int] = []
        for base, coeff, const in self.terms:
            mult = coeff * k + const
            if mult < 0:
                raise KbError(f"hint multiplicity {coeff}k{const:+d} negative at k={k}")
            orders.extend([base] * mult)
        return FgAbGroup.of(*orders)


@dataclass(frozen=True)
class KbFact:
    kind: str
    key: str
    value: object
    cite: str


@dataclass(frozen=True)
class KnowledgeBase:
    facts: tuple[KbFact, ...]
    version: str = ""

    def __post_init__(self) -> None:
        seen = set()
        for f in self.facts:
            if (f.kind, f.key) in seen:
                raise KbError(f"duplicate fact {f.kind}({f.key})")
            seen.add((f.kind, f.key))

    def has(self, kind: str, key: str) -> bool:
        return any(f.kind == kind and f.key == key for f in self.facts)

    def lookup(self, kind: str, key: str) -> KbFact:
        for f in self.facts:
            if f.kind == kind and f.key == key:
                return f
        raise InsufficientKnowledge(kind, key)

    def citations(self) -> frozenset[str]:
        return frozenset(f.cite for f in self.facts)


# ---------------------------------------------------------------------------
# Value grammar
# ---------------------------------------------------------------------------

_TERM_RE = re.compile(r"Z(\d*)(?:\^(\d+))?$")


def parse_group(text: str) -> FgAbGroup:
    """Group syntax: ``0``, or ``+``-joined terms ``Z``, ``Z^r``, ``Zn``, ``Zn^r``."""
    text = text.strip()
    if text == "0":
        return FgAbGroup.trivial()
    orders: list[int] = []
    for term in text.split("+"):
        m = _TERM_RE.fullmatch(term.strip())
        if not m:
            raise KbError(f"cannot parse group term {term.strip()!r}")
        n = int(m.group(1)) if m.group(1) else 0
        if n == 1:
            raise KbError("Z1 is not a valid torsion term")
        mult = int(m.group(2)) if m.group(2) else 1
        orders.extend([n] * mult)
    return FgAbGroup.of(*orders)


def format_group(g: FgAbGroup) -> str:
    return str(g)


_TEMPLATE_TERM_RE = re.compile(r"Z(\d+)(?:\^(?:\{?(\d*)k([+-]\d+)?\}?|(\d+)))?$")


def _parse_hint(text: str) -> ResolutionHint:
    """Hint syntax: ``quotient-of:Z2^{k}+Z2+Z3,prime=2`` with multiplicities
    that are integers or linear expressions in k (``k``, ``2k``, ``k+1``...)."""
    head, _, rest = text.partition(":")
    if head.strip() != "quotient-of":
        raise KbError(f"unknown hint constraint {head.strip()!r}")
    prime: int | None = None
    body = rest
    if ",prime=" in rest:
        body, _, ptxt = rest.partition(",prime=")
        prime = int(ptxt)
    terms: list[tuple[int, int, int]] = []
    for term in body.split("+"):
        term = term.strip()
        m = _TEMPLATE_TERM_RE.fullmatch(term)
        if not m:
            raise KbError(f"cannot parse hint term {term!r}")
        base = int(m.group(1))
        if m.group(4) is not None:  # plain integer multiplicity
            terms.append((base, 0, int(m.group(4))))
        elif m.group(2) is not None or m.group(3) is not None:
            coeff = int(m.group(2)) if m.group(2) else 1
            const = int(m.group(3)) if m.group(3) else 0
            terms.append((base, coeff, const))
        else:
            terms.append((base, 0, 1))
    return ResolutionHint("quotient-of", tuple(terms), prime)


def _format_hint(h: ResolutionHint) -> str:
    parts = []
    for base, coeff, const in h.terms:
        if coeff == 0:
            parts.append(f"Z{base}" if const == 1 else f"Z{base}^{const}")
        else:
            expr = ("" if coeff == 1 else str(coeff)) + "k" + (f"{const:+d}" if const else "")
            parts.append(f"Z{base}^{{{expr}}}")
    text = "quotient-of:" + "+".join(parts)
    if h.prime is not None:
        text += f",prime={h.prime}"
    return text


def _parse_map(text: str) -> MapFact:
    text = text.strip()
    if text.startswith("matrix:"):
        body, _, ttxt = text.removeprefix("matrix:").partition(",target=")
        if not ttxt:
            raise KbError("matrix map needs a target=<n> field")
        rows_text = body.strip()
        if not (rows_text.startswith("[[") or rows_text == "[]") or not rows_text.endswith("]"):
            raise KbError(f"cannot parse matrix {rows_text!r}")
        inner = rows_text[1:-1]
        rows: list[list[int]] = []
        for part in re.findall(r"\[([^\]]*)\]", inner):
            rows.append([int(x) for x in part.split(",") if x.strip() != ""])
        width = len(rows[0]) if rows else 0
        return MapFact("explicit", int(ttxt), matrix=IntMatrix.from_rows(rows, width))
    if not text.startswith("tag:"):
        raise KbError(f"map value must start with tag: or matrix:, got {text!r}")
    fields = text.removeprefix("tag:").split(",")
    tag = fields[0].strip()
    kv: dict[str, str] = {}
    for f in fields[1:]:
        name, _, val = f.partition("=")
        if not val:
            raise KbError(f"malformed map field {f!r}")
        if name.strip() in kv:
            raise KbError(f"repeated map field {name.strip()!r}")
        kv[name.strip()] = val.strip()
    unknown = set(kv) - {"kernel", "image", "target"}
    if unknown:
        raise KbError(f"unknown map fields {sorted(unknown)}")
    if "target" not in kv:
        raise KbError("map value needs a target=<n> field")
    target = int(kv["target"])
    kernel = parse_group(kv["kernel"]) if "kernel" in kv else None
    image = parse_group(kv["image"]) if "image" in kv else None
    if tag == "trivial":
        return MapFact("trivial", target, image=FgAbGroup.trivial(), kernel=kernel)
    if tag == "mono":
        return MapFact("mono", target, kernel=FgAbGroup.trivial(), image=image)
    if tag == "epi":
        return MapFact("epi", target, image=image, kernel=kernel)
    if tag == "image_kernel":
        if image is None or kernel is None:
            raise KbError("image_kernel maps need both image= and kernel=")
        return MapFact("image_kernel", target, image=image, kernel=kernel)
    raise KbError(f"unknown map tag {tag!r}")


def _format_map(m: MapFact) -> str:
    if m.tag == "explicit":
        rows = "[" + ",".join("[" + ",".join(str(m.matrix.at(i, j)) for j in range(m.matrix.cols)) + "]" for i in range(m.matrix.rows)) + "]"
        return f"matrix:{rows},target={m.target}"
    parts = [f"tag:{m.tag}"]
    if m.tag == "image_kernel":
        parts.append(f"image={format_group(m.image)}")
    if m.tag in ("epi", "image_kernel") and m.kernel is not None:
        parts.append(f"kernel={format_group(m.kernel)}")
    parts.append(f"target={m.target}")
    return ",".join(parts)


def _parse_value(kind: str, text: str) -> object:
    if kind in ("Theta", "ConcordanceSet", "InertiaC", "InertiaH", "SkeletonSet"):
        return parse_group(text)
    if kind == "AttachingMap":
        return _parse_map(text)
    if kind in ("HighlyConnectedFlag", "OddCohomologyVanishes"):
        if text.strip() in ("true", "false"):
            return text.strip() == "true"
        raise KbError(f"flag value must be true or false, got {text.strip()!r}")
    if kind == "ResolutionHint":
        return _parse_hint(text)
    if kind == "ImageOverlap":
        t = text.strip()
        if t == "unknown":
            return None
        return parse_group(t)
    raise KbError(f"unknown fact kind {kind!r}")


def _format_value(kind: str, value: object) -> str:
    if kind in ("Theta", "ConcordanceSet", "InertiaC", "InertiaH", "SkeletonSet"):
        return format_group(value)
    if kind == "AttachingMap":
        return _format_map(value)
    if kind in ("HighlyConnectedFlag", "OddCohomologyVanishes"):
        return "true" if value else "false"
    if kind == "ResolutionHint":
        return _format_hint(value)
    if kind == "ImageOverlap":
        return "unknown" if value is None else format_group(value)
    raise KbError(f"unknown fact kind {kind!r}")


# ---------------------------------------------------------------------------
# Loading, validation, serialization
# ---------------------------------------------------------------------------


def load(text: str) -> KnowledgeBase:
    """Parse and validate a knowledge-base document."""
    version = ""
    facts: list[KbFact] = []
    record: dict[str, str] = {}
    record_line = 0

    def flush() -> None:
        nonlocal record
        if not record:
            return
        where = f"record at line {record_line}"
        unknown = set(record) - {"kind", "key", "value", "cite"}
        if unknown:
            raise KbError(f"{where}: unknown fields {sorted(unknown)}")
        for needed in ("kind", "key", "value", "cite"):
            if needed not in record:
                raise KbError(f"{where}: missing field {needed!r}")
        kind = record["kind"]
        if kind not in KINDS:
            raise KbError(f"{where}: unknown fact kind {kind!r}")
        if not record["cite"].strip():
            raise KbError(f"{where}: empty citation")
        try:
            value = _parse_value(kind, record["value"])
        except KbError as e:
            raise KbError(f"{where} ({kind}({record['key']})): {e}") from None
        facts.append(KbFact(kind, record["key"].strip(), value, record["cite"].strip()))
        record = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            flush()
            continue
        name, sep, val = line.partition(":")
        if not sep:
            raise KbError(f"line {lineno}: expected 'field: value', got {line.strip()!r}")
        name = name.strip()
        if name == "version" and not record:
            version = val.strip()
            continue
        if not record:
            record_line = lineno
        if name in record:
            raise KbError(f"record at line {record_line}: repeated field {name!r}")
        record[name] = val.strip()
    flush()

    kb = KnowledgeBase(tuple(facts), version)
    _validate(kb)
    return kb


def load_file(path) -> KnowledgeBase:
    with open(path, encoding="utf-8") as fh:
        return load(fh.read())


def serialize(kb: KnowledgeBase) -> str:
    out = []
    if kb.version:
        out.append(f"version: {kb.version}")
        out.append("")
    for f in kb.facts:
        out.append(f"kind: {f.kind}")
        out.append(f"key: {f.key}")
        out.append(f"value: {_format_value(f.kind, f.value)}")
        out.append(f"cite: {f.cite}")
        out.append("")
    return "\n".join(out)


def _embeds_numerically(image: FgAbGroup, theta: FgAbGroup) -> bool:
    # necessary embedding checks used at validation: order and exponent divide
    return theta.order() % image.order() == 0 and theta.exponent() % image.exponent() == 0


def _validate(kb: KnowledgeBase) -> None:
    for f in kb.facts:
        name = f"{f.kind}({f.key})"
        if f.kind in ("ConcordanceSet", "InertiaC", "InertiaH", "SkeletonSet", "AttachingMap", "HighlyConnectedFlag", "OddCohomologyVanishes"):
            try:
                parse_block(f.key)
            except ValueError as e:
                raise KbError(f"{name}: {e}") from None
        if f.kind == "Theta" and not f.key.isdigit():
            raise KbError(f"{name}: Theta keys are sphere dimensions")
        if f.kind != "AttachingMap":
            continue
        m: MapFact = f.value
        domain = None
        if kb.has("ConcordanceSet", f.key):
            domain = kb.lookup("ConcordanceSet", f.key).value
        elif parse_block(f.key).family == "S" and kb.has("Theta", str(parse_block(f.key).index)):
            domain = kb.lookup("Theta", str(parse_block(f.key).index)).value
        theta = kb.lookup("Theta", str(m.target)).value if kb.has("Theta", str(m.target)) else None
        image = m.image_class(theta)
        kernel = m.kernel
        if m.tag == "mono" and domain is not None:
            image = domain
        if domain is not None and image is not None and kernel is not None:
            if image.order() * kernel.order() != domain.order():
                raise KbError(
                    f"{name}: inconsistent qualitative map, |image|*|kernel| = "
                    f"{image.order()}*{kernel.order()} != |domain| = {domain.order()}"
                )
        if image is not None and theta is not None and not _embeds_numerically(image, theta):
            raise KbError(f"{name}: image {image} cannot embed in Theta_{m.target} = {theta}")
        if m.tag == "explicit":
            if domain is None or theta is None:
                raise KbError(f"{name}: explicit matrices need ConcordanceSet({f.key}) and Theta({m.target}) facts")
            dom_pres = Presentation.of_group(domain)
            cod_pres = Presentation.of_group(theta)
            try:
                Homomorphism(dom_pres, cod_pres, m.matrix)
            except ValueError as e:
                raise KbError(f"{name}: {e}") from None


@lru_cache(maxsize=1)
def default_kb() -> KnowledgeBase:
    """The shipped knowledge base."""
    text = resources.files("concord.data").joinpath("default_kb.txt").read_text(encoding="utf-8")
    return load(text)


# ---------------------------------------------------------------------------
# Derived lookups used by the engine
# ---------------------------------------------------------------------------

SPHERE_CONCORDANCE_CITE = "C(S^n) = Theta_n for n >= 5 (Kervaire-Milnor h-cobordism identification)"


def concordance_group(kb: KnowledgeBase, block: BlockId) -> tuple[FgAbGroup, str]:
    """Concordance structure set of a block, with its citation.

    Sphere blocks fall back to the Theta fact in dimension >= 5; this is the
    definitional identification, not a default.
    """
    key = str(block)
    if kb.has("ConcordanceSet", key):
        f = kb.lookup("ConcordanceSet", key)
        return f.value, f.cite
    if block.family == "S" and block.index >= 5 and kb.has("Theta", str(block.index)):
        f = kb.lookup("Theta", str(block.index))
        return f.value, f"{f.cite}; {SPHERE_CONCORDANCE_CITE}"
    raise InsufficientKnowledge("ConcordanceSet", key)


def skeleton_group(kb: KnowledgeBase, block: BlockId) -> tuple[FgAbGroup, str]:
    """The group of the (dim-1)-skeleton of a block."""
    key = str(block)
    if kb.has("SkeletonSet", key):
        f = kb.lookup("SkeletonSet", key)
        return f.value, f.cite
    if block.family == "S":
        return FgAbGroup.trivial(), "a sphere has a point skeleton"
    # HP1 is the 4-sphere: its skeleton set is trivial as well.
    if block.family == "HP" and block.index == 1:
        return FgAbGroup.trivial(), "HP1 = S4 has a point skeleton"
    below = skeleton_of(block)
    if below is not None:
        return concordance_group(kb, below)
    raise InsufficientKnowledge("SkeletonSet", key)


def attaching_fact(kb: KnowledgeBase, block: BlockId) -> KbFact:
    """Induced attaching-map fact for a summand block, keyed by its skeleton."""
    below = skeleton_of(block)
    key = str(below) if below is not None else str(block)
    return kb.lookup("AttachingMap", key)


# ---------------------------------------------------------------------------
# Representative surjections for qualitative facts
# ---------------------------------------------------------------------------

_SURJECTION_ENUM_LIMIT = 200_000


def all_surjections(domain: FgAbGroup, image: FgAbGroup) -> list[Homomorphism]:
    """All surjective maps domain -> image between canonical presentations.

    Enumerates every generator matrix compatible with the cyclic orders and
    keeps those with trivial cokernel.  Intended for the small groups that
    appear as qualitative attaching data; raises if the search space is
    unreasonably large.
    """
    d = domain.torsion
    e = image.torsion
    dom = Presentation.of_group(domain)
    cod = Presentation.of_group(image)
    if not e:
        return [Homomorphism.zero(dom, cod)]
    choices: list[list[int]] = []
    total = 1
    for ei in e:
        for dj in d:
            step = ei // math.gcd(ei, dj)
            vals = list(range(0, ei, step)) if step < ei else [0]
            total *= len(vals)
            choices.append(vals)
    if total > _SURJECTION_ENUM_LIMIT:
        raise KbError(f"surjection enumeration too large ({total} matrices)")
    out = []
    for flat in iter_product(*choices):
        matrix = IntMatrix(len(e), len(d), tuple(flat))
        f = Homomorphism(dom, cod, matrix)
        if hom_cokernel(f)[0].is_trivial:
            out.append(f)
    return out


def kernel_of_surjection_onto(domain: FgAbGroup, image: FgAbGroup) -> FgAbGroup:
    """Kernel class of a surjection domain ->> image, checked to be
    independent of the representative.

    Every surjection with the stated image class is enumerated (desk-scale
    domains) and all kernel classes must agree; disagreement is a hard
    error, never a silent choice.
    """
    surjections = all_surjections(domain, image)
    if not surjections:
        raise KbError(f"no surjection {domain} ->> {image} exists")
    kernels = {hom_kernel(f)[0] for f in surjections}
    if len(kernels) != 1:
        raise RepresentativeDependence(
            f"kernel of a surjection {domain} ->> {image} depends on the representative: "
            f"{sorted(map(str, kernels))}"
        )
    return next(iter(kernels))
