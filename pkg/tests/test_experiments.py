import numpy as np
import pytest

from netqalign import (
    CSV_HEADER,
    DegenerateInputError,
    ExperimentRecord,
    Graph,
    ValidationError,
    align_pipeline,
    gap_precision_experiment,
    isorank,
    metadata_json,
    random_doubly_stochastic,
    records_csv,
    success_experiment,
    wishart,
)
from conftest import random_connected_graph


def test_wishart_is_positive_with_unit_spectral_radius():
    m = wishart(8, 51)
    assert np.all(m > 0)
    assert np.array_equal(m, m.T)
    w = np.linalg.eigvalsh(m)
    assert w[-1] == pytest.approx(1.0, abs=1e-12)
    assert w[0] >= -1e-12  # Gram matrices are positive semidefinite


def test_wishart_is_deterministic_per_seed():
    assert np.array_equal(wishart(5, 7), wishart(5, 7))
    assert not np.array_equal(wishart(5, 7), wishart(5, 8))
    with pytest.raises(ValidationError):
        wishart(1, 0)


def test_random_doubly_stochastic_properties():
    m = random_doubly_stochastic(6, 52)
    assert np.allclose(m.sum(axis=0), 1.0, atol=1e-9)
    assert np.allclose(m.sum(axis=1), 1.0, atol=1e-9)
    assert np.array_equal(m, m.T)
    assert np.all(m > 0)
    assert np.array_equal(m, random_doubly_stochastic(6, 52))


def test_random_doubly_stochastic_gap_rejection():
    m = random_doubly_stochastic(5, 53, min_gap=0.1)
    w = np.linalg.eigvalsh(m)
    assert w[-1] - w[-2] >= 0.1
    with pytest.raises(ValidationError):
        random_doubly_stochastic(5, 53, min_gap=0.99, max_attempts=3)
    with pytest.raises(ValidationError):
        random_doubly_stochastic(5, -1)


def test_success_experiment_records_analytic_and_simulated():
    records = success_experiment([4, 8], 3, kappa=4, seed=9)
    assert len(records) == 6
    assert {r.size for r in records} == {4, 8}
    for r in records:
        assert r.experiment == "wishart"
        assert r.kappa == 4
        assert 0.0 < r.beta_n_sq <= 1.0
        assert 0.0 <= r.qpe_success <= 1.0
        assert r.gap > 0.0
        assert r.fidelity is None
        # the top eigenvalue is exactly 1, so its weight lands fully on
        # code 0; other components can only add to the simulated figure
        assert r.qpe_success >= r.beta_n_sq - 1e-9


def test_success_experiment_is_order_independent():
    one = success_experiment([4, 6], 2, kappa=3, seed=11)
    two = success_experiment([6, 4], 2, kappa=3, seed=11)
    assert sorted(one, key=lambda r: (r.size, r.trial)) == sorted(
        two, key=lambda r: (r.size, r.trial)
    )


def test_success_experiment_threaded_matches_serial(monkeypatch):
    serial = success_experiment([4], 4, kappa=3, seed=12)
    monkeypatch.setenv("NETQALIGN_THREADS", "3")
    threaded = success_experiment([4], 4, kappa=3, seed=12)
    assert serial == threaded


def test_success_experiment_validates_arguments():
    with pytest.raises(ValidationError):
        success_experiment([], 3)
    with pytest.raises(ValidationError):
        success_experiment([4], 0)
    with pytest.raises(ValidationError):
        success_experiment([4], 3, kappa=0)
    with pytest.raises(ValidationError):
        success_experiment([4], 3, seed=-2)


def test_gap_precision_experiment_shape_and_determinism():
    records = gap_precision_experiment([0.25, 0.125], [4, 5], seed=3, size=8)
    assert len(records) == 4
    for r in records:
        assert r.experiment == "gap"
        assert 0.0 <= r.fidelity <= 1.0 + 1e-12
        assert r.gap in (0.25, 0.125)
    again = gap_precision_experiment([0.25, 0.125], [4, 5], seed=3, size=8)
    assert records == again


def test_gap_precision_experiment_wide_gap_is_faithful():
    records = gap_precision_experiment([0.25], [6], seed=1, size=8)
    assert records[0].fidelity >= 1.0 - 1e-6
    assert records[0].qpe_success == pytest.approx(records[0].beta_n_sq, abs=1e-6)


def test_gap_precision_experiment_validates_arguments():
    with pytest.raises(ValidationError):
        gap_precision_experiment([0.0], [4])
    with pytest.raises(ValidationError):
        gap_precision_experiment([0.25], [])
    with pytest.raises(ValidationError):
        gap_precision_experiment([0.25], [4], size=2)
    # a huge gap leaves no room between the filler band and 1 - gap
    with pytest.raises(ValidationError):
        gap_precision_experiment([0.9], [4], size=8)


def test_align_pipeline_identical_graphs_recover_identity():
    g = random_connected_graph(6, 0)
    pairs, check = align_pipeline([g, g], kappa=6)
    assert check.cosine >= 0.999
    assert not check.flagged
    assert check.converged
    assert sorted(p.nodes for p in pairs) == [(i, i) for i in range(6)]


def test_align_pipeline_agrees_with_classical_isorank(triangle):
    g2 = random_connected_graph(4, 61)
    pairs, check = align_pipeline([triangle, g2], kappa=6)
    classical, _ = isorank([triangle, g2], 1.0, tol=1e-12)
    assert np.allclose(check.classical, classical.values, atol=1e-8)
    assert check.success_probability > 0.5
    assert len(pairs) == 3


def test_align_pipeline_unsymmetrised_with_prior(triangle):
    g2 = random_connected_graph(4, 62)
    h = np.ones(12)
    pairs, check = align_pipeline(
        [triangle, g2], alpha=0.8, h=h, kappa=5, symmetrize=False
    )
    assert 0.0 <= check.cosine <= 1.0 + 1e-9
    assert len(pairs) == 3
    assert check.cosine > 0.99


def test_align_pipeline_argument_validation(triangle):
    with pytest.raises(ValidationError):
        align_pipeline([triangle])
    with pytest.raises(ValidationError):
        align_pipeline([triangle, triangle], alpha=0.8)
    with pytest.raises(ValidationError):
        align_pipeline([triangle, triangle], h=np.ones(9))
    isolated = Graph.from_edges(3, [(0, 1)], directed=False)
    with pytest.raises(DegenerateInputError):
        align_pipeline([triangle, isolated])


def test_align_pipeline_top_limits_pairs(triangle):
    pairs, _ = align_pipeline([triangle, triangle], kappa=5, top=2)
    assert len(pairs) == 2


def test_records_csv_header_and_float_round_trip():
    records = [ExperimentRecord("wishart", 4, 0, 3, 0.5, 1.0 / 3.0, 0.25)]
    text = records_csv(records)
    lines = text.splitlines()
    assert lines[0] == CSV_HEADER
    fields = lines[1].split(",")
    assert fields[0] == "wishart"
    assert [int(f) for f in fields[1:4]] == [4, 0, 3]
    assert float(fields[5]) == 1.0 / 3.0  # repr round-trips exactly


def test_records_csv_gap_records_add_fidelity_column():
    gap_rec = ExperimentRecord("gap", 8, 0, 4, 0.25, 0.9, 0.8, fidelity=0.99)
    text = records_csv([gap_rec])
    assert text.splitlines()[0] == CSV_HEADER + ",fidelity"
    assert text.splitlines()[1].endswith(",0.99")
    with pytest.raises(ValidationError):
        records_csv([gap_rec, ExperimentRecord("wishart", 4, 0, 3, 0.5, 0.9, 0.9)])


def test_metadata_json_is_sorted_single_line():
    line = metadata_json(kind="gap", seed=0, gaps=[0.25])
    assert line == '{"gaps": [0.25], "kind": "gap", "seed": 0}\n'
