"""Icon rules against a literal quantifier oracle, plus agreement metrics."""

import random

import pytest

from privacylens.icons import (
    ICONS,
    STRATEGIES,
    IconAssignment,
    LabeledPolicy,
    assign_all,
    assign_icon,
    compare_assignments,
    comparison_table,
    select_segments,
)

# ---------------------------------------------------------------------------
# Brute-force oracle: a literal transcription of the quantified conditions,
# written independently of the implementation.
# ---------------------------------------------------------------------------

CHOICES = ["opt-in", "opt-out-link", "opt-out-via-contacting-company"]


def oracle_select(lp, icon):
    S = set()
    for i, (cats, pairs) in enumerate(lp.segment_labels):
        if icon == "ExpectedUse":
            if "first-party-collection-use" in cats and ("purpose", "advertising") in pairs:
                S.add(i)
        elif icon == "ExpectedCollection":
            purpose_ok = False
            for v in ("advertising", "analytics-research"):
                if ("purpose", v) in pairs:
                    purpose_ok = True
            action_ok = False
            for v in ("track-on-first-party-website-app", "collect-on-first-party-website-app"):
                if ("action-third-party", v) in pairs:
                    action_ok = True
            if "third-party-sharing-collection" in cats and purpose_ok and action_ok:
                S.add(i)
        elif icon == "PreciseLocation":
            if ("personal-information-type", "location") in pairs:
                S.add(i)
        elif icon == "DataRetention":
            if "data-retention" in cats:
                S.add(i)
        elif icon == "ChildrenPrivacy":
            if "international-and-specific-audiences" in cats and (
                "audience-type",
                "children",
            ) in pairs:
                S.add(i)
    return S


def oracle_choice_segment(cats, pairs):
    if "user-choice-control" not in cats:
        return False
    for v in CHOICES:
        if ("choice-type", v) in pairs:
            return True
    return False


def oracle_color(lp, icon, strategy):
    S = oracle_select(lp, icon)
    if icon == "ChildrenPrivacy":
        return "Green" if len(S) > 0 else "Red"
    if icon == "DataRetention":
        if len(S) == 0:
            return "Red"
        ok = True
        for i in S:
            cats, pairs = lp.segment_labels[i]
            if ("retention-period", "stated-period") not in pairs and (
                "retention-period",
                "limited",
            ) not in pairs:
                ok = False
        return "Green" if ok else "Yellow"
    # the three choice-governed icons
    if len(S) == 0:
        return "Green"
    if icon not in ("ExpectedUse", "ExpectedCollection"):
        strategy = "conservative"
    if strategy == "conservative":
        yellow = True
        for i in S:
            if not oracle_choice_segment(*lp.segment_labels[i]):
                yellow = False
    elif strategy == "permissive":
        yellow = False
        for i in S:
            if oracle_choice_segment(*lp.segment_labels[i]):
                yellow = True
    else:
        yellow = False
        for cats, pairs in lp.segment_labels:
            for v in CHOICES:
                if ("choice-type", v) in pairs:
                    yellow = True
    return "Yellow" if yellow else "Red"


CATEGORY_POOL = [
    "first-party-collection-use",
    "third-party-sharing-collection",
    "user-choice-control",
    "data-retention",
    "international-and-specific-audiences",
    "data-security",
]
PAIR_POOL = [
    ("purpose", "advertising"),
    ("purpose", "analytics-research"),
    ("action-third-party", "track-on-first-party-website-app"),
    ("action-third-party", "collect-on-first-party-website-app"),
    ("action-third-party", "receive-shared-with"),
    ("personal-information-type", "location"),
    ("personal-information-type", "contact"),
    ("retention-period", "stated-period"),
    ("retention-period", "limited"),
    ("retention-period", "indefinitely"),
    ("audience-type", "children"),
    ("choice-type", "opt-in"),
    ("choice-type", "opt-out-link"),
    ("choice-type", "opt-out-via-contacting-company"),
    ("choice-type", "browser-device-privacy-controls"),
]


def random_labeled_policy(rng, max_segments=8):
    n = rng.randint(0, max_segments)
    segs = []
    for _ in range(n):
        cats = {c for c in CATEGORY_POOL if rng.random() < 0.3}
        pairs = {p for p in PAIR_POOL if rng.random() < 0.25}
        segs.append((cats, pairs))
    return LabeledPolicy.from_label_sets("p", segs)


class TestHandFixtures:
    def test_expected_use_selection(self):
        lp = LabeledPolicy.from_label_sets(
            "p",
            [
                ({"first-party-collection-use"}, {("purpose", "advertising")}),
                ({"first-party-collection-use"}, {("purpose", "marketing")}),
                ({"data-security"}, {("purpose", "advertising")}),
            ],
        )
        assert select_segments(lp, "ExpectedUse") == {0}

    def test_expected_use_empty_policy_green(self):
        lp = LabeledPolicy.from_label_sets("p", [])
        assert assign_icon(lp, "ExpectedUse").color == "Green"

    def test_conservative_vs_permissive(self):
        s1 = (
            {"first-party-collection-use", "user-choice-control"},
            {("purpose", "advertising"), ("choice-type", "opt-out-link")},
        )
        s2 = ({"first-party-collection-use"}, {("purpose", "advertising")})
        lp = LabeledPolicy.from_label_sets("p", [s1, s2])
        assert assign_icon(lp, "ExpectedUse", "conservative").color == "Red"
        assert assign_icon(lp, "ExpectedUse", "permissive").color == "Yellow"

    def test_very_permissive_choice_outside_s(self):
        s1 = ({"first-party-collection-use"}, {("purpose", "advertising")})
        s2 = (set(), {("choice-type", "opt-in")})  # choice mentioned elsewhere
        lp = LabeledPolicy.from_label_sets("p", [s1, s2])
        assert assign_icon(lp, "ExpectedUse", "permissive").color == "Red"
        assert assign_icon(lp, "ExpectedUse", "very_permissive").color == "Yellow"

    def test_data_retention_colors(self):
        stated = ({"data-retention"}, {("retention-period", "stated-period")})
        forever = ({"data-retention"}, {("retention-period", "indefinitely")})
        assert assign_icon(LabeledPolicy.from_label_sets("p", [stated]), "DataRetention").color == "Green"
        assert assign_icon(LabeledPolicy.from_label_sets("p", [forever]), "DataRetention").color == "Yellow"
        assert assign_icon(LabeledPolicy.from_label_sets("p", []), "DataRetention").color == "Red"

    def test_children_privacy_green_red_only(self):
        kid = ({"international-and-specific-audiences"}, {("audience-type", "children")})
        assert assign_icon(LabeledPolicy.from_label_sets("p", [kid]), "ChildrenPrivacy").color == "Green"
        assert assign_icon(LabeledPolicy.from_label_sets("p", []), "ChildrenPrivacy").color == "Red"
        with pytest.raises(ValueError):
            IconAssignment(icon="ChildrenPrivacy", color="Yellow", evidence=frozenset())

    def test_all_empty_policy_icon_vector(self):
        lp = LabeledPolicy.from_label_sets("p", [])
        colors = [a.color for a in assign_all(lp)]
        assert colors == ["Green", "Green", "Green", "Red", "Red"]

    def test_evidence_is_s(self):
        s1 = ({"data-retention"}, set())
        s2 = ({"data-security"}, set())
        lp = LabeledPolicy.from_label_sets("p", [s1, s2])
        assignment = assign_icon(lp, "DataRetention")
        assert assignment.evidence == frozenset({0})


class TestOracleAgreement:
    def test_random_policies_match_oracle(self):
        rng = random.Random(2718)
        for _ in range(2000):
            lp = random_labeled_policy(rng)
            for icon in ICONS:
                for strategy in STRATEGIES:
                    got = assign_icon(lp, icon, strategy)
                    assert got.color == oracle_color(lp, icon, strategy), (
                        icon,
                        strategy,
                        lp,
                    )
                    assert got.evidence == frozenset(oracle_select(lp, icon))

    def test_monotone_permissiveness(self):
        rng = random.Random(3141)
        order = {"Red": 0, "Yellow": 1}
        for _ in range(2000):
            lp = random_labeled_policy(rng)
            for icon in ("ExpectedUse", "ExpectedCollection"):
                colors = [assign_icon(lp, icon, s).color for s in STRATEGIES]
                if colors[0] == "Green":
                    assert colors[1] == colors[2] == "Green"
                    continue
                assert order[colors[0]] <= order[colors[1]] <= order[colors[2]]

    def test_label_order_independence(self):
        rng = random.Random(999)
        for _ in range(50):
            lp = random_labeled_policy(rng)
            rebuilt = LabeledPolicy.from_label_sets(
                lp.policy_id,
                [(set(sorted(c, reverse=True)), set(sorted(p, reverse=True))) for c, p in lp.segment_labels],
            )
            for icon in ICONS:
                assert assign_icon(lp, icon) == assign_icon(rebuilt, icon)


class TestComparisons:
    def make_assignments(self, colors_per_policy):
        out = []
        for colors in colors_per_policy:
            row = []
            for icon, color in zip(ICONS, colors):
                if icon == "ChildrenPrivacy" and color == "Yellow":
                    color = "Red"
                row.append(IconAssignment(icon=icon, color=color, evidence=frozenset()))
            out.append(row)
        return out

    def test_identical_assignments(self):
        a = self.make_assignments([["Red"] * 5, ["Green"] * 5])
        report = compare_assignments(a, a)
        for icon in ICONS:
            assert report[icon]["accuracy"] == 1.0
            assert report[icon]["kappa"] == 1.0
            assert report[icon]["hellinger"] == pytest.approx(0.0)

    def test_half_split_hellinger(self):
        a = self.make_assignments([["Red"] * 5, ["Green"] * 5])
        b = self.make_assignments([["Red"] * 5, ["Red"] * 5])
        report = compare_assignments(a, b)
        for icon in ICONS:
            assert report[icon]["hellinger"] == pytest.approx(0.5412, abs=1e-4)

    def test_disjoint_distributions(self):
        a = self.make_assignments([["Red"] * 5])
        b = self.make_assignments([["Green"] * 5])
        report = compare_assignments(a, b)
        for icon in ICONS:
            assert report[icon]["hellinger"] == pytest.approx(1.0)
            assert report[icon]["accuracy"] == 0.0

    def test_length_mismatch(self):
        a = self.make_assignments([["Red"] * 5])
        with pytest.raises(ValueError):
            compare_assignments(a, a + a)

    def test_table_renders(self):
        a = self.make_assignments([["Red"] * 5, ["Green"] * 5, ["Yellow", "Red", "Red", "Yellow", "Green"]])
        text = comparison_table(compare_assignments(a, a))
        assert "ExpectedUse" in text
        assert "N(R)" in text
