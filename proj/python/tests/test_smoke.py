import math

import pytest

import framerank as fr


def small():
    return {
        "n_articles": "120",
        "n_users": "20",
        "train_impressions": "20",
        "validation_impressions": "5",
        "test_impressions": "20",
        "candidates": "10",
    }


def test_metrics():
    assert fr.auc([0.9, 0.1, 0.5], [1, 0, 0]) == 1.0
    assert fr.mrr([0, 0, 1]) == pytest.approx(1 / 3)
    assert fr.ndcg([1, 0], 2) == 1.0
    assert fr.jsd({"A": 1.0}, {"B": 1.0}) == 1.0
    assert fr.divergence({"A": 0.5, "B": 0.5}, {"A": 1.0}) == pytest.approx(0.31128, abs=1e-5)
    assert fr.cramers_v([[20, 5], [5, 20]]) == pytest.approx(0.6)
    assert fr.anova([[1, 2], [3, 4]])["eta_squared"] == pytest.approx(0.8)


def test_errors_map_to_exceptions():
    with pytest.raises(fr.InvalidArgument):
        fr.jsd({"A": 0.5}, {"A": 1.0})
    with pytest.raises(fr.ConfigError):
        fr.Config().set("nope", "1")
    assert issubclass(fr.ConfigError, fr.Error)


def test_corpus_rank_and_round_trip(tmp_path):
    corpus = fr.synthesize(3, small())
    assert len(corpus) == 120
    imp = corpus.impressions("test")[0]
    slate = fr.rank(imp, corpus, -0.4)
    assert sorted(a for a, _ in slate) == sorted(imp.candidates)
    scores = [s for _, s in slate]
    assert scores == sorted(scores, reverse=True)
    fr.write_corpus(corpus, tmp_path)
    assert fr.load_corpus(tmp_path) == corpus
    assert corpus.embeddings("frame").shape[0] == 120


def test_supcon_gradient():
    import numpy as np

    rng = np.random.default_rng(0)
    base = rng.normal(size=(6, 4))
    w = rng.normal(size=(3, 4))
    labels = [0, 1, 0, 1, 2, 2]
    loss, grad = fr.supcon_loss(base, labels, w, 0.7)
    eps = 1e-6
    w2 = w.copy()
    w2[1, 2] += eps
    assert (fr.supcon_loss(base, labels, w2, 0.7)[0] - loss) / eps == pytest.approx(grad[1, 2], rel=1e-3)


def test_sweep(tmp_path):
    cfg = fr.Config()
    for k, v in small().items():
        cfg.set("synth." + k, v)
    cfg.lambdas = [-0.4, 0.0, 0.4]
    cfg.seeds = [1, 2]
    report = fr.run_sweep(cfg)
    assert report.all_ok()
    assert len(report.cells) == 6
    assert all(0.0 <= row["auc"] <= 1.0 for row in report.summary)
    assert not math.isnan(report.summary[0]["cal_f_std"])
    fr.emit_reports(report, tmp_path, False)
    assert (tmp_path / "sweep.csv").read_text().count("\n") == 4
