import logging

import numpy as np
import pytest

from simcca.data import FeatureMeta, PairedDataset, ViewMatrix, preprocess_pair, window
from simcca.errors import EmptyResultError, ParseError
from simcca.scan import (
    MethodChoice,
    ScanConfig,
    dependency_score,
    fit_window,
    read_profile,
    scan,
)
from simcca.pcca import EmConfig, ModelParams
from simcca.synth import generate, planted_spec


@pytest.fixture(scope="module")
def planted():
    paired, spec, _ = generate(planted_spec(51, 30, [(12, 18)], seed=3, loading=1.5))
    return preprocess_pair(paired, apply_log2=False)


def two_chromosomes(n_long=12, n_short=3, seed=0):
    rng = np.random.default_rng(seed)
    feats = [FeatureMeta(f"a{i}", "chr1", 1000 * (i + 1)) for i in range(n_long)]
    feats += [FeatureMeta(f"b{i}", "chr2", 1000 * (i + 1)) for i in range(n_short)]
    p = len(feats)
    samples = tuple(f"s{j}" for j in range(20))
    x = ViewMatrix(tuple(feats), rng.standard_normal((20, p)), samples)
    y = ViewMatrix(tuple(feats), rng.standard_normal((20, p)), samples)
    return PairedDataset(x, y, tuple((i, i, 0) for i in range(p)))


class TestMethodChoice:
    def test_labels_round_trip(self):
        for m in (MethodChoice("cca"), MethodChoice("simcca-soft", 0.25),
                  MethodChoice("psimcca-soft", 1e-3)):
            assert MethodChoice.parse(m.label) == m

    def test_validation(self):
        with pytest.raises(ValueError):
            MethodChoice("lasso")
        with pytest.raises(ValueError):
            MethodChoice("simcca-soft")
        assert MethodChoice("cca", 3.0).sigma_t is None


class TestScan:
    def test_one_score_per_gene(self, planted):
        prof = scan(planted, MethodChoice("simcca"), 5)
        assert len(prof) == 30
        assert prof.probe_ids == [f.probe_id for f in planted.features]
        assert all(e.converged for e in prof.entries)
        assert np.all((prof.scores >= -1) & (prof.scores <= 1))

    @pytest.mark.parametrize("method", ["cca", "simcca", "psimcca", "psimpca"])
    def test_planted_region_peaks(self, planted, method):
        prof = scan(planted, MethodChoice(method), 5)
        assert 12 <= int(np.argmax(prof.scores)) < 18

    def test_probabilistic_scores_nonnegative(self, planted):
        prof = scan(planted, MethodChoice("pcca"), 4)
        assert np.all(prof.scores >= 0)

    def test_edge_windows_shared(self, planted):
        prof = scan(planted, MethodChoice("cca"), 7)
        # the first four centers all use the window starting at gene 0
        assert len(set(prof.scores[:4])) == 1
        assert prof.scores[3] != prof.scores[4]

    def test_short_chromosome_skipped(self, caplog):
        with caplog.at_level(logging.WARNING, logger="simcca.scan"):
            prof = scan(two_chromosomes(), MethodChoice("cca"), 5)
        assert len(prof) == 12
        assert "chr2" in caplog.text

    def test_nothing_scannable(self):
        with pytest.raises(EmptyResultError):
            scan(two_chromosomes(3, 2), MethodChoice("cca"), 5)

    def test_workers_do_not_change_results(self, planted):
        cfg = ScanConfig(seed=4, em=EmConfig(n_restarts=2, max_iterations=50))
        one = scan(planted, MethodChoice("psimcca-soft", 0.5), 4, cfg)
        two = scan(planted, MethodChoice("psimcca-soft", 0.5), 4,
                   ScanConfig(seed=4, workers=2, em=cfg.em))
        np.testing.assert_array_equal(one.scores, two.scores)
        assert one.to_tsv() == two.to_tsv()

    def test_soft_interpolates(self, planted):
        win = window(planted, 15, 5)
        strict, _ = fit_window(win, MethodChoice("simcca"))
        loose, _ = fit_window(win, MethodChoice("simcca-soft", 1e6))
        free, _ = fit_window(win, MethodChoice("cca"))
        assert strict - 1e-8 <= loose <= free + 1e-8
        assert abs(loose - free) < 1e-4


class TestProfileIo:
    def test_round_trip(self, planted, tmp_path):
        prof = scan(planted, MethodChoice("simcca-soft", 0.5), 5)
        path = tmp_path / "p.tsv"
        prof.write(path)
        back = read_profile(path)
        assert back.probe_ids == prof.probe_ids
        np.testing.assert_allclose(back.scores, prof.scores, atol=5e-7)
        assert back.entries[0].method == MethodChoice("simcca-soft", 0.5)
        assert back.to_tsv() == prof.to_tsv()

    def test_bad_header(self, tmp_path):
        path = tmp_path / "p.tsv"
        path.write_text("a\tb\n")
        with pytest.raises(ParseError, match="line 1"):
            read_profile(path)

    def test_bad_row(self, planted, tmp_path):
        path = tmp_path / "p.tsv"
        text = scan(planted, MethodChoice("cca"), 5).to_tsv()
        path.write_text(text + "g9\tchrS\tx\t0.1\tcca\t5\ttrue\n")
        with pytest.raises(ParseError, match="line 32"):
            read_profile(path)


def test_dependency_score_by_hand():
    params = ModelParams(np.ones((2, 1)), 2 * np.ones((2, 1)), np.eye(2), 3 * np.eye(2))
    # (2 + 8) / (2 + 6)
    assert dependency_score(params) == pytest.approx(1.25)
