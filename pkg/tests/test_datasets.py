import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from invbandit.datasets import (
    BATTERY_MU_MAX,
    BATTERY_SIGMA,
    GENE_PINNED_ARM,
    GENE_VARIANCE,
    RawArmTable,
    fixture_path,
    load_arm_table,
    normalize_affine,
    normalize_max,
    subsample_arms,
)
from invbandit.errors import (
    DegenerateRangeError,
    DuplicateArmIdError,
    KTooLargeError,
    MuMaxTooSmallError,
    NegativeStdError,
    ParseError,
    UnknownPinnedIdError,
)


def write(tmp_path, text, name="t.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoad:
    def test_two_rows(self, tmp_path):
        t = load_arm_table(write(tmp_path, "arm_id,mean,std\na,1.5,0.1\nb,2,0\n"))
        assert t.arm_ids == ("a", "b") and t.means.tolist() == [1.5, 2.0]

    @pytest.mark.parametrize("text,exc,line", [
        ("arm_id,mean,std\na,1,0\na,2,0\n", DuplicateArmIdError, None),
        ("arm_id,mean,std\na,1,-0.1\n", NegativeStdError, None),
        ("id,mean,std\na,1,0\n", ParseError, 1),
        ("arm_id,mean,std\na,1,0\nb,x,0\n", ParseError, 3),
        ("arm_id,mean,std\na,1\n", ParseError, 2),
        ("arm_id,mean,std\n", ParseError, 2),
    ])
    def test_errors(self, tmp_path, text, exc, line):
        with pytest.raises(exc) as info:
            load_arm_table(write(tmp_path, text))
        if line is not None:
            assert info.value.line == line

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_arm_table(tmp_path / "nope.csv")

    @pytest.mark.parametrize("name,rows", [("battery_high.csv", 224), ("battery_low.csv", 224),
                                           ("gene_expression.csv", 1500)])
    def test_fixtures(self, name, rows):
        assert len(load_arm_table(fixture_path(name))) == rows


class TestNormalizeMax:
    def test_battery_constants(self):
        table = load_arm_table(fixture_path("battery_high.csv"))
        inst = normalize_max(table, BATTERY_MU_MAX, BATTERY_SIGMA)
        assert inst.means.max() == 1.0
        assert abs(inst.means.min() - 0.47434) < 1e-5
        assert abs(inst.reward_model.variance - 0.018427) < 1e-5
        assert np.all((inst.means > 0) & (inst.means <= 1))

    def test_too_small(self):
        table = RawArmTable(("a", "b"), [10.0, 20.0], [1.0, 1.0])
        with pytest.raises(MuMaxTooSmallError):
            normalize_max(table, 19.0, 1.0)
        with pytest.raises(MuMaxTooSmallError):
            normalize_max(table, 0.0, 1.0)

    @given(st.lists(st.floats(1e-3, 1e4), min_size=1, max_size=30), st.floats(1.0, 3.0))
    def test_unit_interval(self, raw, headroom):
        table = RawArmTable(tuple(map(str, range(len(raw)))), raw, [0.0] * len(raw))
        inst = normalize_max(table, max(raw) * headroom, 1.0)
        assert np.all((inst.means > 0) & (inst.means <= 1))


class TestNormalizeAffine:
    def test_gene_constants(self):
        table = load_arm_table(fixture_path("gene_expression.csv"))
        inst = normalize_affine(table, GENE_VARIANCE)
        assert abs(inst.reward_model.variance - 0.009127) < 1e-5
        assert inst.means.min() == 0.0 and inst.means.max() == 1.0

    def test_degenerate(self):
        with pytest.raises(DegenerateRangeError):
            normalize_affine(RawArmTable(("a", "b"), [1.0, 1.0], [0, 0]), 0.1)

    @given(st.lists(st.floats(-100, 100), min_size=2, max_size=30, unique=True),
           st.floats(-50, 50))
    def test_span_order_and_shift_invariance(self, raw, shift):
        if np.ptp(raw) < 1e-3:
            return
        ids = tuple(map(str, range(len(raw))))
        inst = normalize_affine(RawArmTable(ids, raw, [0.0] * len(raw)), 0.1)
        assert inst.means.min() == 0.0 and inst.means.max() == 1.0
        order = np.argsort(raw, kind="stable")
        assert np.all(np.diff(inst.means[order]) >= 0)
        moved = normalize_affine(RawArmTable(ids, np.array(raw) + shift, [0.0] * len(raw)), 0.1)
        np.testing.assert_allclose(moved.means, inst.means, atol=1e-9)
        assert moved.reward_model.variance == pytest.approx(inst.reward_model.variance, rel=1e-9)


class TestSubsample:
    def table(self):
        return load_arm_table(fixture_path("gene_expression.csv"))

    def test_identity(self):
        t = load_arm_table(fixture_path("battery_high.csv"))
        assert subsample_arms(t, len(t), 3) == t

    def test_pinned(self):
        sub = subsample_arms(self.table(), 100, 5, [GENE_PINNED_ARM])
        assert GENE_PINNED_ARM in sub.arm_ids and len(sub) == 100

    def test_deterministic(self):
        t = self.table()
        assert subsample_arms(t, 20, 9) == subsample_arms(t, 20, 9)
        assert subsample_arms(t, 20, 9) != subsample_arms(t, 20, 10)

    def test_order_preserved(self):
        t = self.table()
        sub = subsample_arms(t, 50, 1)
        pos = [t.arm_ids.index(a) for a in sub.arm_ids]
        assert pos == sorted(pos)

    def test_stratified_covers_range(self):
        t = load_arm_table(fixture_path("battery_high.csv"))
        sub = subsample_arms(t, 20, 0)
        assert sub.means.min() == t.means.min() or sub.means.min() < np.percentile(t.means, 10)
        assert sub.means.max() > np.percentile(t.means, 90)

    def test_errors(self):
        t = self.table()
        with pytest.raises(KTooLargeError):
            subsample_arms(t, 1501, 0)
        with pytest.raises(UnknownPinnedIdError):
            subsample_arms(t, 10, 0, ["no-such-arm"])
        with pytest.raises(KTooLargeError):
            subsample_arms(t, 1, 0, [t.arm_ids[0], t.arm_ids[1]])

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 60), st.data())
    def test_property(self, n, data):
        raw = data.draw(st.lists(st.floats(-10, 10), min_size=n, max_size=n))
        table = RawArmTable(tuple(f"a{i}" for i in range(n)), raw, [0.0] * n)
        k = data.draw(st.integers(1, n))
        pins = data.draw(st.lists(st.sampled_from(table.arm_ids), max_size=k, unique=True))
        seed = data.draw(st.integers(0, 2**32))
        a = subsample_arms(table, k, seed, pins)
        assert a == subsample_arms(table, k, seed, pins)
        assert len(a) == k and set(pins) <= set(a.arm_ids)
