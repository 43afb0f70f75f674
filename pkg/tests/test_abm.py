import numpy as np
import pytest

from gogrow import abm
from gogrow.model import InvalidInputError


def test_binomial_seeding():
    lp = abm.LatticeParams(side=100, seeding=0.05)
    K = lp.n_sites
    bound = 4 * np.sqrt(K * 0.05 * 0.95)
    for seed in abm.spawn_seeds(42, 10):
        st = abm.init(lp, seed)
        assert abs(st.n_motile - 500) <= bound
        abm.check_consistency(st)


def test_full_and_empty_lattice():
    st = abm.init(abm.LatticeParams(side=20, seeding=1.0), 0)
    assert st.n_motile == 400
    s = abm.run(st, 10.0, 0.5, check=True)
    assert np.all(s.total_density == 1.0)
    st = abm.init(abm.LatticeParams(side=20, seeding=0.0), 0)
    s = abm.run(st, 10.0, 0.5, check=True)
    assert np.all(s.total_density == 0.0)


def test_single_agent_without_motility_grows():
    lp = abm.LatticeParams(side=50, seeding=0.0, motility_rate=0.0)
    st = abm.init(lp, 3)
    site = 25 * 50 + 25
    st.occupancy[site] = abm.MOTILE
    st.motile[0] = site
    st.slot[site] = 0
    st.n_motile = 1
    s = abm.run(st, 4.0, 1.0, check=True)
    # a lone cluster has free neighbours: early divisions all succeed
    counts = np.rint(s.total_density * lp.n_sites)
    assert counts[0] == 1 and counts[-1] >= 4


def test_counts_never_decrease_and_queue_consistent():
    lp = abm.LatticeParams(side=30, seeding=0.1)
    st = abm.init(lp, 9)
    prev = st.n_motile + st.q_size
    for k in range(1, 21):
        abm.run(st, 0.37 * k, 0.37, check=True)
        total = st.n_motile + st.q_size
        assert total >= prev
        assert np.all(st.occupancy <= 2)
        prev = total


def test_proliferative_density_equals_pending_queue():
    lp = abm.LatticeParams(side=30, seeding=0.2)
    st = abm.init(lp, 5)
    abm.run(st, 3.3, 0.1)
    qt, _ = st.queue()
    assert np.all((qt > st.t) & (qt <= st.t + lp.cycle_delay))
    assert np.count_nonzero(st.occupancy == abm.PROLIFERATIVE) == qt.size


def test_identical_seeds_zero_variance():
    lp = abm.LatticeParams(side=30)
    seed = abm.spawn_seeds(1, 1)[0]
    res = abm.ensemble(lp, [seed, seed, seed], 3.0, 0.5)
    for run in res.runs[1:]:
        np.testing.assert_array_equal(run.total_density, res.runs[0].total_density)
    for key in res.std:
        assert np.all(res.std[key] < 1e-15)


def test_empty_ensemble_mean_zero():
    res = abm.ensemble(abm.LatticeParams(side=10, seeding=0.0), abm.spawn_seeds(0, 4), 2.0, 0.5)
    assert np.all(res.mean["total_density"] == 0)


def test_threads_do_not_change_results():
    lp = abm.LatticeParams(side=30)
    seeds = abm.spawn_seeds(77, 6)
    a = abm.ensemble(lp, seeds, 3.0, 0.5, threads=1)
    b = abm.ensemble(lp, seeds, 3.0, 0.5, threads=4)
    np.testing.assert_array_equal(a.mean["total_density"], b.mean["total_density"])


def test_variance_scales_inversely_with_sites():
    scaled = []
    for side in (25, 50, 100):
        res = abm.ensemble(abm.LatticeParams(side=side), abm.spawn_seeds(side, 200), 5.0, 5.0)
        scaled.append(res.std["total_density"][-1] ** 2 * side ** 2)
    assert max(scaled) / min(scaled) < 2.0


def test_mean_field_agreement_at_t10():
    lp = abm.LatticeParams(side=100, seeding=0.05)
    res = abm.ensemble(lp, abm.spawn_seeds(2024, 20), 10.0, 1.0)
    mf = abm.mean_field_density(lp, 10.0)
    assert res.mean["total_density"][-1] == pytest.approx(mf.total_density[-1], rel=0.10)


def test_motility_insensitive_early():
    seeds = abm.spawn_seeds(8, 40)
    slow = abm.ensemble(abm.LatticeParams(side=50, motility_rate=0.0), seeds, 2.0, 1.0)
    fast = abm.ensemble(abm.LatticeParams(side=50, motility_rate=10.0), seeds, 2.0, 1.0)
    width = 3 * np.hypot(slow.std["total_density"], fast.std["total_density"]) / np.sqrt(40)
    assert np.all(np.abs(slow.mean["total_density"] - fast.mean["total_density"]) <= width + 1e-12)


@pytest.mark.parametrize("dims", [1, 3])
def test_other_dimensions(dims):
    lp = abm.LatticeParams(n_dims=dims, side=12 if dims == 3 else 500, seeding=0.1)
    st = abm.init(lp, 0)
    abm.run(st, 3.0, 1.0, check=True)


def test_param_validation(tmp_path):
    with pytest.raises(InvalidInputError):
        abm.LatticeParams(seeding=1.5)
    with pytest.raises(InvalidInputError):
        abm.LatticeParams(boundary="reflecting")
    cfg = tmp_path / "lattice.cfg"
    cfg.write_text("# test lattice\nside = 40\nseeding = 0.1\nswitch_rate = 2\n")
    lp = abm.load_lattice_params(cfg)
    assert (lp.side, lp.seeding, lp.motility_rate) == (40, 0.1, 20.0)
    cfg.write_text("sides = 40\n")
    with pytest.raises(InvalidInputError):
        abm.load_lattice_params(cfg)


def test_ensemble_needs_two_seeds():
    with pytest.raises(InvalidInputError):
        abm.ensemble(abm.LatticeParams(side=10), [0], 1.0, 0.5)
