# Copyright 2026 The svsmlab Authors
# SPDX-License-Identifier: Apache-2.0

import math
import os
import pathlib

import numpy as np
import pytest

import svsmlab

FIXTURES = pathlib.Path(os.environ.get("SVSM_FIXTURE_DIR", pathlib.Path(__file__).parents[2] / "fixtures"))


def tiny_model(family="svsm_encdec"):
    return {
        "family": family,
        "enc_dim": 16,
        "dec_dim": 16,
        "enc_layers": 1,
        "dec_layers": 1,
        "head_dim": 8,
        "patch_size": 4,
    }


def tiny_config():
    return {
        "run_id": "py-b2-vt2",
        "model": tiny_model(),
        "data": {"height": 8, "width": 8, "scenes": 4},
        "batch": 2,
        "target_views": 2,
        "steps": 4,
        "eval_every": 2,
        "eval_scene_count": 2,
    }


def test_flops_mlp_ratio():
    svsm = dict(tiny_model(), enc_dim=64, dec_dim=64, enc_layers=2, dec_layers=2, patch_size=8)
    lvsm = dict(svsm, family="lvsm_dec")
    s = svsmlab.forward_flops(svsm, 2, 6, 32, 32)
    l = svsmlab.forward_flops(lvsm, 2, 6, 32, 32)
    assert s["mlp_proj"] * 18 == l["mlp_proj"] * 8
    assert isinstance(s["total"], int)
    assert svsmlab.train_flops(lvsm, 2, 6, 4, 10, 32, 32) == 4 * 10 * 3 * l["total"]


def test_presets_and_param_count():
    names = svsmlab.model_presets()
    assert names
    assert svsmlab.param_count(names[0]) > 0
    with pytest.raises(svsmlab.ConfigError):
        svsmlab.model_preset("no-such-model")


def test_fit_laws_on_fixture():
    records = svsmlab.read_run_log(str(FIXTURES / "synthetic.jsonl"))
    (laws,) = svsmlab.analyze_scaling(records)
    assert laws["allocation"]["N_opt"]["exponent"] == pytest.approx(0.52, abs=1e-4)
    assert laws["allocation"]["D_opt"]["exponent"] == pytest.approx(0.47, abs=1e-4)
    assert laws["loss"]["above"]["exponent"] == pytest.approx(-0.23, abs=1e-3)
    grid = svsmlab.budget_grid(records)
    assert svsmlab.pareto_frontier(records, grid) == laws["frontier"]


def test_train_and_render(tmp_path):
    ckpt = tmp_path / "m.ckpt"
    result = svsmlab.train(tiny_config(), checkpoint=str(ckpt))
    records = result["records"]
    assert [r["step"] for r in records] == [2, 4]
    assert records[-1]["D"] == 2 * 2 * 4
    assert math.isfinite(result["final_eval"]["psnr"])
    svsmlab.write_run_log(str(tmp_path / "log.jsonl"), records)
    assert svsmlab.read_run_log(str(tmp_path / "log.jsonl")) == records
    pred, gt = svsmlab.render_checkpoint(str(ckpt), target_views=1)
    assert pred.shape == gt.shape == (1, 8, 8, 3)
    assert 0.0 <= pred.min() and pred.max() <= 1.0


def test_bad_config_raises():
    cfg = tiny_config()
    cfg["bogus"] = 1
    with pytest.raises(svsmlab.ConfigError):
        svsmlab.validate_experiment_config(cfg)


def test_episode_and_metrics():
    ep = svsmlab.sample_episode(3, 2, 1, 16, 16, seed=1)
    assert ep["context"].shape == (2, 16, 16, 3)
    img = ep["target"][0]
    assert svsmlab.image_mse(img, img) == 0.0
    assert svsmlab.psnr_from_mse(0.0) == 99.0
    assert svsmlab.ssim(img, img) == pytest.approx(1.0)
    assert svsmlab.ssim(img, np.full_like(img, 0.5)) < 1.0


def test_grad_check_registry():
    names = svsmlab.registered_grad_checks()
    assert "prope_attention" in names and "model_svsm_encdec" in names
    assert svsmlab.grad_check("layer_norm")["max_rel_error"] < 1e-5
