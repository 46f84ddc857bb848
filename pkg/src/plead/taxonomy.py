"""Closed vocabulary of the nine explanation dimensions and classification checks.

All enum values use lower_snake_case tokens, which double as the wire format
of the registry file and the local names used in the RDF encoding.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum


class SourceKind(str, Enum):
    PRIMARY_EXPLICIT = "primary_explicit"
    PRIMARY_IMPLICIT = "primary_implicit"
    SECONDARY = "secondary"
    TERTIARY = "tertiary"

    @property
    def rank(self) -> int:
        """0 is the most primary; larger numbers are further from hard law."""
        return _SOURCE_ORDER.index(self)

    @property
    def label(self) -> str:
        return _SOURCE_LABELS[self]


_SOURCE_ORDER = list(SourceKind)
_SOURCE_LABELS = {
    SourceKind.PRIMARY_EXPLICIT: "Primary:explicit",
    SourceKind.PRIMARY_IMPLICIT: "Primary:implicit",
    SourceKind.SECONDARY: "Secondary",
    SourceKind.TERTIARY: "Tertiary",
}


class Perspective(str, Enum):
    EX_ANTE = "ex_ante"
    EX_POST = "ex_post"


class Autonomy(str, Enum):
    PROACTIVE = "proactive"
    REACTIVE = "reactive"


class TriggerKind(str, Enum):
    ACTION = "action"
    PROCESSING = "processing"
    DECISION = "decision"


class Sensitivity(str, Enum):
    AGGREGATED = "aggregated"
    IDENTIFIABLE = "identifiable"


class Confidentiality(str, Enum):
    DISCLOSABLE = "disclosable"
    CONFIDENTIAL = "confidential"


class Scope(str, Enum):
    LOCAL = "local"
    UNIVERSAL = "universal"


class Priority(str, Enum):
    MANDATORY = "mandatory"
    DISCRETIONARY = "discretionary"


class GoalFamily(str, Enum):
    UNDERSTANDABILITY = "understandability"
    INTERVENABILITY = "intervenability"


class Goal(str, Enum):
    # Understandability
    ACCOUNTABILITY = "accountability"
    ACCURACY = "accuracy"
    CONSEQUENCES = "consequences"
    DATA_MINIMISATION = "data_minimisation"
    FAIRNESS = "fairness"
    INFORMATION = "information"
    REASSURANCE = "reassurance"
    SATISFACTION = "satisfaction"
    PERSUASIVENESS = "persuasiveness"
    TRANSPARENCY = "transparency"
    TRUST = "trust"
    # Intervenability
    ACCESS = "access"
    CONTESTING_A_DECISION = "contesting_a_decision"
    EFFICIENCY = "efficiency"
    ERASURE = "erasure"
    MAKING_A_COMPLAINT = "making_a_complaint"
    MODIFYING_A_BEHAVIOUR = "modifying_a_behaviour"
    HUMAN_INTERVENTION = "human_intervention"
    PORTABILITY = "portability"
    RECTIFICATION = "rectification"
    FURTHER_INFORMATION = "further_information"
    RESTRICTION = "restriction"
    SCRUTABILITY = "scrutability"

    @property
    def family(self) -> GoalFamily:
        return goal_family(self)

    @property
    def label(self) -> str:
        return self.value.replace("_", " ").capitalize()


UNDERSTANDABILITY_GOALS = frozenset(
    {
        Goal.ACCOUNTABILITY,
        Goal.ACCURACY,
        Goal.CONSEQUENCES,
        Goal.DATA_MINIMISATION,
        Goal.FAIRNESS,
        Goal.INFORMATION,
        Goal.REASSURANCE,
        Goal.SATISFACTION,
        Goal.PERSUASIVENESS,
        Goal.TRANSPARENCY,
        Goal.TRUST,
    }
)


def goal_family(g: Goal) -> GoalFamily:
    if g in UNDERSTANDABILITY_GOALS:
        return GoalFamily.UNDERSTANDABILITY
    return GoalFamily.INTERVENABILITY


class Facing(str, Enum):
    OUTWARD_FACING = "outward_facing"
    INWARD_FACING = "inward_facing"

    @property
    def label(self) -> str:
        return "Outward-facing" if self is Facing.OUTWARD_FACING else "Inward-facing"


CORE_RECIPIENTS: dict[str, Facing] = {
    "data_subject": Facing.OUTWARD_FACING,
    "supervisory_authority": Facing.OUTWARD_FACING,
    "third_party": Facing.OUTWARD_FACING,
    "administrator": Facing.INWARD_FACING,
    "business_analyst": Facing.INWARD_FACING,
    "legal_engineer": Facing.INWARD_FACING,
    "data_engineer": Facing.INWARD_FACING,
    "manager": Facing.INWARD_FACING,
}

# The six items an Article 22 decision explanation must carry according to the
# UK regulator's guidance on automated decision-making.
ICO_MINIMUM_CONTENT: tuple[str, ...] = (
    "which information were taken into account",
    "the rationale behind the decision",
    "the key decision points that formed the basis for the decision",
    "any alternative decisions that were considered and why they were not preferred",
    "how to ask for a review",
    "how to make an appeal, and the available appeal grounds",
)


@dataclass(frozen=True)
class SourceRank:
    kind: SourceKind
    citation: str = ""

    @property
    def label(self) -> str:
        return f"{self.kind.label} ({self.citation})" if self.citation else self.kind.label


@dataclass(frozen=True)
class TriggerSpec:
    kind: TriggerKind
    event: str

    @property
    def label(self) -> str:
        return f"{self.kind.value.capitalize()} ({self.event})"


@dataclass(frozen=True)
class ContentItem:
    id: str
    description: str


@dataclass(frozen=True)
class ContentSpec:
    sensitivity: Sensitivity
    confidentiality: Confidentiality
    minimum: tuple[ContentItem, ...]

    def item(self, item_id: str) -> ContentItem:
        for it in self.minimum:
            if it.id == item_id:
                return it
        raise KeyError(item_id)

    @property
    def item_ids(self) -> tuple[str, ...]:
        return tuple(it.id for it in self.minimum)


@dataclass(frozen=True)
class RecipientClass:
    facing: Facing
    name: str
    is_extension: bool = False
    # Stem for the per-instance RDF individual; defaults to the name.
    alias: str | None = None

    @property
    def is_outward(self) -> bool:
        return self.facing is Facing.OUTWARD_FACING

    @property
    def label(self) -> str:
        return self.name.replace("_", " ").capitalize()


def recipient(name: str, facing: Facing | None = None, **kw) -> RecipientClass:
    """Build a core recipient, or an extension when ``facing`` is given for a new name."""
    if name in CORE_RECIPIENTS:
        return RecipientClass(facing or CORE_RECIPIENTS[name], name, **kw)
    if facing is None:
        raise ValueError(f"extension recipient {name!r} must declare a facing")
    return RecipientClass(facing, name, is_extension=True, **kw)


@dataclass(frozen=True)
class Classification:
    """One requirement's values across all nine dimensions.

    Set-valued dimensions are stored as tuples so that duplicates and
    emptiness stay observable to :func:`validate_classification`; use
    :meth:`canonical` for order-insensitive comparison.
    """

    sources: tuple[SourceRank, ...]
    perspective: Perspective
    autonomy: Autonomy
    trigger: TriggerSpec
    content: ContentSpec
    scope: Scope
    goals: tuple[Goal, ...]
    recipients: tuple[RecipientClass, ...]
    priority: Priority

    def canonical(self) -> Classification:
        return replace(
            self,
            sources=tuple(sorted(set(self.sources), key=lambda s: (s.kind.rank, s.citation))),
            goals=tuple(sorted(set(self.goals), key=lambda g: g.value)),
            recipients=tuple(sorted(set(self.recipients), key=lambda r: (r.facing.value, r.name))),
        )

    @property
    def most_primary(self) -> SourceKind | None:
        if not self.sources:
            return None
        return min((s.kind for s in self.sources), key=lambda k: k.rank)


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(v.code for v in self.violations)

    def __bool__(self) -> bool:
        return bool(self.violations)


def _dupes(values) -> list:
    return [v for v, n in Counter(values).items() if n > 1]


def validate_classification(c: Classification) -> ValidationReport:
    out: list[Violation] = []

    def add(code: str, message: str) -> None:
        out.append(Violation(code, message))

    if not c.sources:
        add("MissingSources", "at least one source is required")
    if not c.goals:
        add("MissingGoals", "at least one explainability goal is required")
    if not c.recipients:
        add("MissingRecipients", "at least one intended recipient is required")
    if not c.content.minimum:
        add("MissingMinimumContent", "minimum content must list at least one item")
    if not c.trigger.event:
        add("EmptyTriggerEvent", "trigger event name must be nonempty")

    for s in _dupes(c.sources):
        add("DuplicateSource", f"source {s.label} listed twice")
    for g in _dupes(c.goals):
        add("DuplicateGoal", f"goal {g.value} listed twice")
    for name in _dupes(r.name for r in c.recipients):
        add("DuplicateRecipient", f"recipient {name} listed twice")
    for item_id in _dupes(it.id for it in c.content.minimum):
        add("DuplicateContentItem", f"minimum-content item id {item_id} listed twice")

    for r in c.recipients:
        core = CORE_RECIPIENTS.get(r.name)
        if core is not None and core is not r.facing:
            add("RecipientFacingMismatch", f"core recipient {r.name} is {core.value}, not {r.facing.value}")

    if c.content.confidentiality is Confidentiality.CONFIDENTIAL:
        for r in c.recipients:
            if r.is_outward:
                add(
                    "ConfidentialOutwardRecipient",
                    f"confidential content cannot be addressed to outward-facing {r.name}",
                )
    return ValidationReport(tuple(out))


# vocabulary ----------------------------------------------------------------


@dataclass(frozen=True)
class SubProperty:
    name: str
    values: tuple[str, ...]
    # Free-text sub-properties (minimum content) have no enumerated values.
    open: bool = False


@dataclass(frozen=True)
class Dimension:
    name: str
    rdf_class: str
    rdf_property: str
    sub_properties: tuple[SubProperty, ...]
    # Table columns: sub-properties for split dimensions, otherwise the dimension itself.
    columns: tuple[str, ...] = ()

    @property
    def values(self) -> tuple[str, ...]:
        return tuple(v for sp in self.sub_properties for v in sp.values)


@dataclass(frozen=True)
class TaxonomyVocabulary:
    dimensions: tuple[Dimension, ...]
    goal_families: dict[GoalFamily, tuple[Goal, ...]] = field(hash=False)

    CONCISENESS_LIMIT = 9

    @property
    def dimension_count(self) -> int:
        return len(self.dimensions)

    def is_concise(self) -> bool:
        """Dimension count within Miller's seven-plus-or-minus-two bound."""
        return 7 - 2 <= self.dimension_count <= self.CONCISENESS_LIMIT

    def dimension(self, name: str) -> Dimension:
        for d in self.dimensions:
            if d.name == name:
                return d
        raise KeyError(name)

    def dimension_of(self, value: str) -> list[str]:
        return [d.name for d in self.dimensions if value in d.values]

    @property
    def columns(self) -> tuple[str, ...]:
        return tuple(col for d in self.dimensions for col in d.columns)


def _vals(enum_cls) -> tuple[str, ...]:
    return tuple(m.value for m in enum_cls)


def vocabulary() -> TaxonomyVocabulary:
    families = {
        GoalFamily.UNDERSTANDABILITY: tuple(g for g in Goal if g in UNDERSTANDABILITY_GOALS),
        GoalFamily.INTERVENABILITY: tuple(g for g in Goal if g not in UNDERSTANDABILITY_GOALS),
    }
    outward = tuple(n for n, f in CORE_RECIPIENTS.items() if f is Facing.OUTWARD_FACING)
    inward = tuple(n for n, f in CORE_RECIPIENTS.items() if f is Facing.INWARD_FACING)
    dims = (
        Dimension(
            "Source",
            "Source",
            "hasSource",
            (
                SubProperty("primary", ("primary_explicit", "primary_implicit")),
                SubProperty("secondary", ("secondary",)),
                SubProperty("tertiary", ("tertiary",)),
            ),
            ("Source",),
        ),
        Dimension("Perspective", "Perspective", "hasPerspective", (SubProperty("perspective", _vals(Perspective)),), ("Perspective",)),
        Dimension("Autonomy", "Autonomy", "hasAutonomy", (SubProperty("autonomy", _vals(Autonomy)),), ("Autonomy",)),
        Dimension("Trigger", "Trigger", "hasTrigger", (SubProperty("trigger", _vals(TriggerKind)),), ("Trigger",)),
        Dimension(
            "Content",
            "Content",
            "hasContent",
            (
                SubProperty("Sensitivity", _vals(Sensitivity)),
                SubProperty("Confidentiality", _vals(Confidentiality)),
                SubProperty("Minimum content", (), open=True),
            ),
            ("Sensitivity", "Confidentiality", "Minimum content"),
        ),
        Dimension("Scope", "Scope", "hasScope", (SubProperty("scope", _vals(Scope)),), ("Scope",)),
        Dimension(
            "Explainability goal",
            "ExplainabilityGoal",
            "hasGoal",
            tuple(SubProperty(fam.value.capitalize(), tuple(g.value for g in gs)) for fam, gs in families.items()),
            ("Understandability", "Intervenability"),
        ),
        Dimension(
            "Intended recipient",
            "IntendedRecipient",
            "hasIntendedRecipient",
            (SubProperty("Outward-facing", outward), SubProperty("Inward-facing", inward)),
            ("Outward-facing", "Inward-facing"),
        ),
        Dimension("Priority", "Priority", "hasPriority", (SubProperty("priority", _vals(Priority)),), ("Priority",)),
    )
    return TaxonomyVocabulary(dims, families)
