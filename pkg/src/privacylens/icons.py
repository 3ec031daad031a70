"""Short-notice privacy icons assigned by first-order rules over labels.

Five icons are evaluated against a policy's per-segment discrete labels
(expert annotations or thresholded classifier output). The choice-based
Yellow condition comes in three strengths: conservative (all evidence
segments offer a choice), permissive (at least one does), and
very-permissive (any segment anywhere in the policy offers one).
"""

from dataclasses import dataclass

from .metrics import cohen_kappa, format_table, hellinger

__all__ = [
    "ICONS",
    "COLORS",
    "STRATEGIES",
    "LabeledPolicy",
    "IconAssignment",
    "select_segments",
    "assign_icon",
    "assign_all",
    "compare_assignments",
    "comparison_table",
]

ICONS = (
    "ExpectedUse",
    "ExpectedCollection",
    "PreciseLocation",
    "DataRetention",
    "ChildrenPrivacy",
)
COLORS = ("Red", "Green", "Yellow", "Gray")
STRATEGIES = ("conservative", "permissive", "very_permissive")

# only these two icons vary with the strategy
_STRATEGY_ICONS = ("ExpectedUse", "ExpectedCollection")

_CHOICE_TYPES = ("opt-in", "opt-out-link", "opt-out-via-contacting-company")


@dataclass(frozen=True)
class LabeledPolicy:
    """Per-segment discrete labels: (category set, attribute-value pair set)."""

    policy_id: str
    segment_labels: tuple  # tuple of (frozenset[str], frozenset[(str, str)])

    @classmethod
    def from_label_sets(cls, policy_id, per_segment):
        return cls(
            policy_id=policy_id,
            segment_labels=tuple(
                (frozenset(cats), frozenset((a, v) for a, v in pairs))
                for cats, pairs in per_segment
            ),
        )


@dataclass(frozen=True)
class IconAssignment:
    icon: str
    color: str
    evidence: frozenset  # the S set: segment indices
    strategy: str = "conservative"

    def __post_init__(self):
        if self.icon not in ICONS:
            raise ValueError(f"unknown icon {self.icon!r}")
        if self.color not in COLORS:
            raise ValueError(f"unknown color {self.color!r}")
        if self.icon == "ChildrenPrivacy" and self.color == "Yellow":
            raise ValueError("ChildrenPrivacy is never Yellow")

    def to_dict(self):
        return {
            "icon": self.icon,
            "color": self.color,
            "strategy": self.strategy,
            "evidence": sorted(self.evidence),
        }


def _has_value(pairs, attribute, allowed):
    return any(a == attribute and v in allowed for a, v in pairs)


def select_segments(lp, icon):
    """The evidence set S: indices of segments matching the icon's query."""
    selected = set()
    for idx, (cats, pairs) in enumerate(lp.segment_labels):
        if icon == "ExpectedUse":
            hit = "first-party-collection-use" in cats and _has_value(
                pairs, "purpose", ("advertising",)
            )
        elif icon == "ExpectedCollection":
            hit = (
                "third-party-sharing-collection" in cats
                and _has_value(pairs, "purpose", ("advertising", "analytics-research"))
                and _has_value(
                    pairs,
                    "action-third-party",
                    (
                        "track-on-first-party-website-app",
                        "collect-on-first-party-website-app",
                    ),
                )
            )
        elif icon == "PreciseLocation":
            hit = _has_value(pairs, "personal-information-type", ("location",))
        elif icon == "DataRetention":
            hit = "data-retention" in cats
        elif icon == "ChildrenPrivacy":
            hit = "international-and-specific-audiences" in cats and _has_value(
                pairs, "audience-type", ("children",)
            )
        else:
            raise ValueError(f"unknown icon {icon!r}")
        if hit:
            selected.add(idx)
    return selected


def _offers_choice(cats, pairs):
    return "user-choice-control" in cats and _has_value(pairs, "choice-type", _CHOICE_TYPES)


def assign_icon(lp, icon, strategy="conservative"):
    """Color per the icon's rule; strategy affects only the two choice icons."""
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    S = select_segments(lp, icon)
    effective = strategy if icon in _STRATEGY_ICONS else "conservative"

    if icon == "ChildrenPrivacy":
        color = "Green" if len(S) > 0 else "Red"
    elif icon == "DataRetention":
        if not S:
            color = "Red"
        elif all(
            _has_value(lp.segment_labels[i][1], "retention-period", ("stated-period", "limited"))
            for i in S
        ):
            color = "Green"
        else:
            color = "Yellow"
    else:  # ExpectedUse / ExpectedCollection / PreciseLocation
        if not S:
            color = "Green"
        else:
            if effective == "conservative":
                yellow = all(_offers_choice(*lp.segment_labels[i]) for i in S)
            elif effective == "permissive":
                yellow = any(_offers_choice(*lp.segment_labels[i]) for i in S)
            else:  # very_permissive: any segment in the whole policy
                yellow = any(
                    _has_value(pairs, "choice-type", _CHOICE_TYPES)
                    for _cats, pairs in lp.segment_labels
                )
            color = "Yellow" if yellow else "Red"
    return IconAssignment(icon=icon, color=color, evidence=frozenset(S), strategy=strategy)


def assign_all(lp, strategy="conservative"):
    """All five IconAssignments, in the canonical icon order."""
    return [assign_icon(lp, icon, strategy) for icon in ICONS]


def _color_distribution(colors):
    counts = [colors.count(c) for c in COLORS]
    total = sum(counts)
    return [c / total for c in counts] if total else [0.0] * len(COLORS)


def compare_assignments(assignments_a, assignments_b):
    """Per-icon agreement between two assignment lists over the same policies.

    Each argument is a list (one entry per policy) of per-icon assignment
    lists. Returns {icon: {accuracy, kappa, hellinger, histogram_a,
    histogram_b}}.
    """
    if len(assignments_a) != len(assignments_b):
        raise ValueError("assignment lists cover different policy counts")
    report = {}
    for pos, icon in enumerate(ICONS):
        colors_a, colors_b = [], []
        for row_a, row_b in zip(assignments_a, assignments_b):
            a, b = row_a[pos], row_b[pos]
            if a.icon != icon or b.icon != icon:
                raise ValueError("assignment rows are not in canonical icon order")
            colors_a.append(a.color)
            colors_b.append(b.color)
        matches = sum(1 for x, y in zip(colors_a, colors_b) if x == y)
        dist_a = _color_distribution(colors_a)
        dist_b = _color_distribution(colors_b)
        report[icon] = {
            "accuracy": matches / len(colors_a) if colors_a else 1.0,
            "kappa": cohen_kappa(colors_a, colors_b, COLORS) if colors_a else 1.0,
            "hellinger": hellinger(dist_a, dist_b) if colors_a else 0.0,
            "histogram_a": dict(zip(COLORS, [colors_a.count(c) for c in COLORS])),
            "histogram_b": dict(zip(COLORS, [colors_b.count(c) for c in COLORS])),
        }
    return report


def comparison_table(report):
    """Aligned text table mirroring the icon-agreement report layout."""
    rows = []
    for icon in ICONS:
        r = report[icon]
        rows.append(
            [
                icon,
                f"{r['accuracy']:.0%}",
                f"{r['kappa']:.2f}",
                f"{r['hellinger']:.2f}",
                r["histogram_a"]["Red"],
                r["histogram_a"]["Green"],
                r["histogram_a"]["Yellow"],
            ]
        )
    return format_table(
        ["Icon", "Accuracy", "Cohen k", "Hellinger", "N(R)", "N(G)", "N(Y)"], rows
    )
