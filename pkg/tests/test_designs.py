import numpy as np
import pytest

from apfkit.designs import (CLASSIFY_DESIGNS, CLUSTER_DESIGNS, OUTLIER_DESIGNS, SPATIAL_MODELS,
                            TWO_SAMPLE_DESIGNS, curve_of, curves_of, diagram_of, spatial_model)


def test_collinear_points_merge_at_half_gaps():
    pts = [(0, 0), (3, 0), (1, 0)]
    assert diagram_of(pts, 0).points() == [(0.0, 0.5, 1), (0.0, 1.0, 1)]
    assert len(diagram_of(pts, 1)) == 0


def test_tiny_inputs():
    assert len(diagram_of(np.empty((0, 2)), 0)) == 0
    assert len(diagram_of([(1, 1)], 1)) == 0


def test_shared_triangulation_matches_single_curves(rng):
    pts = rng.random((60, 2))
    both = curves_of(pts, [0, 1], (0, 0.3), 50)
    for k in (0, 1):
        assert both[k] == curve_of(pts, k, (0, 0.3), 50)


@pytest.mark.parametrize("name", SPATIAL_MODELS)
def test_spatial_models_have_about_rho_points(name):
    draw = spatial_model(name, 100)
    rng = np.random.default_rng(0)
    counts = [len(draw(rng)) for _ in range(300)]
    assert 85 <= np.mean(counts) <= 115
    assert np.all(np.concatenate([draw(rng) for _ in range(5)]) >= 0)


def test_named_designs_draw_100_points(rng):
    for table in (OUTLIER_DESIGNS, CLUSTER_DESIGNS, CLASSIFY_DESIGNS, TWO_SAMPLE_DESIGNS):
        for draw in table.values():
            assert draw(rng).shape == (100, 2)


def test_unknown_model():
    with pytest.raises(KeyError):
        spatial_model("nope")
