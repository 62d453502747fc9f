import numpy as np
import pytest

from netqalign import (
    KRONECKER_CAP,
    DegenerateInputError,
    Graph,
    KroneckerOperator,
    ParseError,
    SizeError,
    StochasticMatrix,
    ValidationError,
    adjacency,
    degrees,
    format_matrix,
    google_matrix,
    isorank_operator,
    kron_apply,
    kronecker,
    load_edge_list,
    normalize,
    parse_matrix,
)


def test_graph_rejects_out_of_range_edge():
    with pytest.raises(ValidationError):
        Graph(2, ((0, 2, 1.0),))


def test_graph_rejects_negative_weight():
    with pytest.raises(ValidationError):
        Graph(2, ((0, 1, -1.0),))


def test_graph_rejects_duplicate_edges():
    with pytest.raises(ValidationError):
        Graph(3, ((0, 1, 1.0), (0, 1, 2.0)))
    # undirected: (1, 0) is the same edge as (0, 1)
    with pytest.raises(ValidationError):
        Graph(3, ((0, 1, 1.0), (1, 0, 2.0)), directed=False)


def test_graph_rejects_nonpositive_node_count():
    with pytest.raises(ValidationError):
        Graph(0, ())


def test_graph_labels_length_checked():
    with pytest.raises(ValidationError):
        Graph(2, ((0, 1, 1.0),), labels=("a",))


def test_from_edges_merges_duplicates_by_weight_sum():
    g = Graph.from_edges(3, [(0, 1, 2.0), (1, 0, 3.0), (1, 2)], directed=False)
    assert g.edges == ((0, 1, 5.0), (1, 2, 1.0))


def test_from_edges_directed_keeps_both_orientations():
    g = Graph.from_edges(2, [(0, 1), (1, 0)], directed=True)
    assert g.edges == ((0, 1, 1.0), (1, 0, 1.0))


def test_load_edge_list_parses_weights_and_comments():
    text = "# comment line\n0 1\n\n1 2 0.5\n2 0 2\n"
    g = load_edge_list(text, directed=True)
    assert g.node_count == 3
    assert g.edges == ((0, 1, 1.0), (1, 2, 0.5), (2, 0, 2.0))


def test_load_edge_list_merges_undirected_duplicates():
    g = load_edge_list("0 1 1.0\n1 0 2.0\n", directed=False)
    assert g.edges == ((0, 1, 3.0),)


def test_load_edge_list_reports_line_numbers():
    with pytest.raises(ParseError, match="line 2"):
        load_edge_list("0 1\n0 x\n", directed=True)
    with pytest.raises(ParseError, match="line 3"):
        load_edge_list("0 1\n1 2\n0 1 2 3\n", directed=True)
    with pytest.raises(ParseError, match="line 1"):
        load_edge_list("-1 0\n", directed=True)


def test_load_edge_list_rejects_empty_input():
    with pytest.raises(ValidationError):
        load_edge_list("# nothing here\n", directed=True)


def test_load_edge_list_rejects_negative_weight():
    with pytest.raises(ValidationError):
        load_edge_list("0 1 -2.0\n", directed=True)


def test_adjacency_mirrors_undirected_edges(triangle):
    a = adjacency(triangle)
    expected = np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]], dtype=float)
    assert np.array_equal(a, expected)


def test_adjacency_counts_self_loop_once():
    g = Graph.from_edges(2, [(0, 0, 2.0), (0, 1)], directed=False)
    a = adjacency(g)
    assert a[0, 0] == 2.0
    assert a[0, 1] == a[1, 0] == 1.0


def test_degrees_are_column_sums():
    g = Graph.from_edges(3, [(0, 1), (0, 2)], directed=True)
    assert np.array_equal(degrees(g), adjacency(g).sum(axis=0))


def test_stochastic_matrix_validates_convention_sums():
    m = np.array([[0.5, 0.5], [0.2, 0.8]])
    assert StochasticMatrix(m, "row").dim == 2
    with pytest.raises(ValidationError):
        StochasticMatrix(m, "column")
    with pytest.raises(ValidationError):
        StochasticMatrix(m, "doubly")
    with pytest.raises(ValidationError):
        StochasticMatrix(m, "diagonal")


def test_stochastic_matrix_clips_rounding_negatives():
    m = np.array([[1.0 + 1e-12, -1e-12], [0.5, 0.5]])
    s = StochasticMatrix(m, "row")
    assert s.matrix.min() >= 0.0
    with pytest.raises(ValidationError):
        StochasticMatrix(np.array([[1.5, -0.5], [0.5, 0.5]]), "row")


def test_stochastic_matrix_is_frozen():
    s = StochasticMatrix(np.eye(2), "doubly")
    with pytest.raises(ValueError):
        s.matrix[0, 0] = 0.5


def test_normalize_rows_matches_hand_division():
    a = np.array([[2.0, 2.0], [1.0, 3.0]])
    s = normalize(a, "row")
    assert np.allclose(s.matrix, [[0.5, 0.5], [0.25, 0.75]])
    assert s.convention == "row"


def test_normalize_columns():
    a = np.array([[2.0, 1.0], [2.0, 3.0]])
    s = normalize(a, "column")
    assert np.allclose(s.matrix, [[0.5, 0.25], [0.5, 0.75]])


def test_normalize_zero_row_policies():
    a = np.array([[0.0, 0.0], [1.0, 1.0]])
    with pytest.raises(DegenerateInputError, match="row 0"):
        normalize(a, "row")
    s = normalize(a, "row", dangling="redistribute")
    assert np.allclose(s.matrix[0], [0.5, 0.5])
    s = normalize(a, "row", dangling="redistribute", w=[0.3, 0.7])
    assert np.allclose(s.matrix[0], [0.3, 0.7])


def test_normalize_rejects_bad_redistribution_weight():
    a = np.array([[0.0, 0.0], [1.0, 1.0]])
    with pytest.raises(ValidationError):
        normalize(a, "row", dangling="redistribute", w=[0.3, 0.3])


def test_google_matrix_mixes_in_teleportation():
    """alpha P + (1 - alpha) e v^T, checked entrywise against the formula."""
    p = normalize(np.array([[0.0, 1.0], [1.0, 1.0]]), "row")
    v = np.array([0.25, 0.75])
    g = google_matrix(p, 0.8, v)
    expected = 0.8 * p.matrix + 0.2 * np.outer(np.ones(2), v)
    assert np.allclose(g.matrix, expected, atol=1e-15)
    assert np.allclose(g.matrix.sum(axis=1), 1.0, atol=1e-15)
    # identity walk at alpha=0.85 with the uniform teleport, by hand
    gi = google_matrix(StochasticMatrix(np.eye(2), "row"), 0.85, [0.5, 0.5])
    assert np.allclose(gi.matrix, [[0.925, 0.075], [0.075, 0.925]], atol=1e-15)


def test_google_matrix_limits():
    p = normalize(np.array([[0.0, 1.0], [1.0, 1.0]]), "row")
    assert np.allclose(google_matrix(p, 1.0, [0.5, 0.5]).matrix, p.matrix, atol=1e-15)
    assert np.allclose(google_matrix(p, 0.0, [0.5, 0.5]).matrix, 0.5, atol=1e-15)


def test_google_matrix_alpha_range_checked():
    p = normalize(np.ones((2, 2)), "row")
    with pytest.raises(ValidationError):
        google_matrix(p, 1.5, np.array([0.5, 0.5]))


def test_kronecker_matches_numpy_for_three_factors():
    rng = np.random.default_rng(11)
    mats = [rng.normal(size=(d, d)) for d in (2, 3, 2)]
    expected = np.kron(np.kron(mats[0], mats[1]), mats[2])
    assert np.array_equal(kronecker(mats), expected)


def test_kronecker_refuses_products_beyond_cap():
    big = np.eye(KRONECKER_CAP // 2 + 1)
    with pytest.raises(SizeError):
        kronecker([big, np.eye(2)])
    # a custom cap overrides the module default
    with pytest.raises(SizeError):
        kronecker([np.eye(4)], cap=3)


def test_kron_apply_equals_explicit_product():
    rng = np.random.default_rng(12)
    factors = [rng.normal(size=(3, 3)), rng.normal(size=(4, 4))]
    op = KroneckerOperator(tuple(factors))
    x = rng.normal(size=12)
    assert np.allclose(op.apply(x), kronecker(factors) @ x, atol=1e-13)
    assert op.total_dim == 12
    assert np.array_equal(op.materialize(), kronecker(factors))


def test_kron_apply_uses_left_factor_outermost_indexing():
    # with A (x) B, flat index i * dim(B) + j pairs row i of A with row j of B
    a = np.diag([1.0, 2.0])
    b = np.diag([1.0, 10.0])
    x = np.array([1.0, 1.0, 1.0, 1.0])
    assert np.allclose(kron_apply(KroneckerOperator((a, b)), x), [1.0, 10.0, 2.0, 20.0])


def test_kron_apply_checks_vector_length():
    op = KroneckerOperator((np.eye(2), np.eye(3)))
    with pytest.raises(ValidationError):
        kron_apply(op, np.ones(5))


def test_kronecker_operator_rejects_nonsquare_factor():
    with pytest.raises(ValidationError):
        KroneckerOperator((np.ones((2, 3)),))
    with pytest.raises(ValidationError):
        KroneckerOperator(())


def test_isorank_operator_is_column_stochastic(triangle, single_edge):
    op = isorank_operator([triangle, single_edge])
    m = op.materialize()
    assert np.allclose(m.sum(axis=0), 1.0, atol=1e-12)
    assert m.shape == (6, 6)


def test_isorank_operator_rejects_directed_and_isolated():
    directed = Graph.from_edges(2, [(0, 1)], directed=True)
    with pytest.raises(ValidationError):
        isorank_operator([directed])
    isolated = Graph.from_edges(3, [(0, 1)], directed=False)
    with pytest.raises(DegenerateInputError, match="node 2"):
        isorank_operator([isolated])


def test_parse_matrix_round_trip():
    rng = np.random.default_rng(13)
    m = rng.normal(size=(3, 4))
    assert np.array_equal(parse_matrix(format_matrix(m)), m)


def test_parse_matrix_reads_header_and_rows():
    m = parse_matrix("2 3\n1 2 3\n4.5 5 6\n")
    assert np.array_equal(m, [[1, 2, 3], [4.5, 5, 6]])


def test_parse_matrix_error_messages_carry_line_numbers():
    with pytest.raises(ParseError, match="line 1"):
        parse_matrix("2\n1 2\n3 4\n")
    with pytest.raises(ParseError, match="line 2"):
        parse_matrix("2 2\n1 2 3\n3 4\n")
    with pytest.raises(ParseError, match="line 3"):
        parse_matrix("2 2\n1 2\n3 x\n")
    with pytest.raises(ParseError):
        parse_matrix("")
    with pytest.raises(ParseError):
        parse_matrix("2 2\n1 2\n")
