import math

import numpy as np
import pytest

import spoofvqa


def test_metrics_basics():
    assert spoofvqa.compute_auc([0.9, 0.8, 0.1, 0.2], [1, 1, 0, 0]) == 100.0
    assert spoofvqa.compute_auc([0.5, 0.5, 0.5, 0.5], [1, 1, 0, 0]) == 50.0
    assert spoofvqa.compute_hter([0.8, 0.9, 0.1], [1, 1, 0], 0.5) == 0.0
    t = spoofvqa.select_threshold([0.6, 0.4], [1, 0])
    assert 0.4 < t <= 0.6
    with pytest.raises(ValueError):
        spoofvqa.compute_auc([0.5, 0.6], [1, 1])


def test_keyword_filter_matches_the_rule():
    keywords = spoofvqa.default_keywords()
    assert keywords["paper"] == "print"
    assert len(keywords) == 22

    records = [
        dict(image_id="a", label="fake", spoof_type="print",
             caption="a man holding a paper with a photo"),
        dict(image_id="b", label="fake", spoof_type="print",
             caption="a man wearing glasses"),
        dict(image_id="c", label="fake", spoof_type="print",
             caption="face on a screen"),
    ]
    kept = spoofvqa.filter_spoof_aware(records)
    assert [r["image_id"] for r in kept] == ["a"]

    # word-boundary mode drops the "masked" substring match
    rec = [dict(image_id="m", label="fake", spoof_type="mask",
                caption="a masked person")]
    assert len(spoofvqa.filter_spoof_aware(rec)) == 1
    assert len(spoofvqa.filter_spoof_aware(rec, word_boundary=True)) == 0


def test_caption_stub_controls_the_hit_rate():
    caption = spoofvqa.caption_stub("fake", "replay", "spoof_aware",
                                    hit_rate=1.0, seed=3)
    assert any(k in caption for k, t in spoofvqa.default_keywords().items()
               if t == "replay")
    general = spoofvqa.caption_stub("real", None, "general", seed=3)
    assert all(k not in general for k in spoofvqa.default_keywords())


def test_lopsided_loss_boundaries():
    rng = np.random.default_rng(0)
    logits = rng.normal(size=(6, 9))
    targets = rng.integers(0, 9, size=6).tolist()

    b1 = spoofvqa.lopsided_loss(logits, targets, judgment_end=2, alpha=1.0)
    assert b1["total"] == b1["judgment_loss"]
    b0 = spoofvqa.lopsided_loss(logits, targets, judgment_end=2, alpha=0.0)
    assert b0["total"] == b0["interpretation_loss"]

    bh = spoofvqa.lopsided_loss(logits, targets, judgment_end=3, alpha=0.5)
    uniform = spoofvqa.standard_lm_loss(logits, targets)
    assert abs(bh["total"] - uniform) < 1e-12

    assert spoofvqa.standard_lm_loss(np.zeros((4, 11)), [0, 3, 7, 10]) == \
        pytest.approx(math.log(11.0), abs=1e-12)


def test_gac_forward_shapes_and_permutation_invariance():
    gac = spoofvqa.Gac({"d_model": 16, "n_heads": 2, "n_learnable": 2,
                        "n_layers_vision": 4, "mlp_hidden": 32, "d_enc": 8},
                       seed=1)
    rng = np.random.default_rng(1)
    local = rng.normal(size=(5, 8))
    globals_ = rng.normal(size=(4, 8))
    out = gac.forward(local, globals_)
    assert out.shape == (6, 16)
    assert gac.n_tokens == 6
    assert gac.forward_ablated(local, globals_).shape == (6, 16)

    permuted = local[[3, 1, 4, 0, 2]]
    np.testing.assert_allclose(out, gac.forward(permuted, globals_),
                               rtol=0, atol=1e-12)


def test_generate_domain_is_deterministic():
    spec = {"domain_tag": "py_src", "n_samples": 20, "cue_strength": 2.0,
            "spoof_mix": {"print": 0.5, "replay": 0.5}, "seed": 5}
    a = spoofvqa.generate_domain(spec)
    b = spoofvqa.generate_domain(spec)
    np.testing.assert_array_equal(a["local"], b["local"])
    np.testing.assert_array_equal(a["globals"], b["globals"])
    assert a["records"] == b["records"]
    labels = {r["label"] for r in a["records"]}
    assert labels == {"real", "fake"}


def test_train_eval_smoke():
    config = {
        "seed": 3,
        "seeds": [1],
        "features": {"n_local": 6, "n_layers": 4, "d_enc": 12},
        "sources": [{"domain_tag": "s", "n_samples": 48, "cue_strength": 3.0,
                     "spoof_mix": {"print": 0.5, "replay": 0.5}}],
        "targets": [{"domain_tag": "t", "n_samples": 48, "cue_strength": 3.0,
                     "spoof_mix": {"print": 0.5, "replay": 0.5}, "shift": 1.0}],
        "gac": {"d_model": 16, "n_heads": 2, "n_learnable": 2, "mlp_hidden": 32},
        "decoder": {"d_model": 16, "n_heads": 2, "n_blocks": 1, "context": 48,
                    "mlp_hidden": 32},
        "train": {"lr": 0.002, "batch_size": 16, "epochs": 1, "max_steps": 4,
                  "alpha": 0.7},
    }
    report = spoofvqa.run_train_eval(config)
    assert len(report["per_seed"]) == 1
    cell = report["per_seed"][0]["per_domain"][0]
    assert 0.0 <= cell["hter"] <= 100.0
    assert 0.0 <= cell["auc"] <= 100.0
    assert "aggregate" in report
