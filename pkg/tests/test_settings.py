"""Configuration precedence, variants and data-dependent defaults"""

import pytest
from pydantic import ValidationError

from themealign.config.settings import PipelineConfig, load_config, load_variants


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for name in ("THEMEALIGN_SEED", "THEMEALIGN_K", "THEMEALIGN_KAPPA"):
        monkeypatch.delenv(name, raising=False)


class TestPrecedence:

    def test_defaults(self):
        config = load_config()
        assert config.k == 10
        assert config.iterations == 200
        assert config.burn_in == 100
        assert config.seed == 0
        assert config.threads == 1

    def test_environment(self, monkeypatch):
        monkeypatch.setenv("THEMEALIGN_SEED", "7")
        assert load_config().seed == 7

    def test_config_file_beats_environment(self, monkeypatch, write_text):
        monkeypatch.setenv("THEMEALIGN_SEED", "7")
        path = write_text("run.env", "SEED=8\nk=4\n# comment\n")
        config = load_config(path)
        assert config.seed == 8
        assert config.k == 4

    def test_flags_beat_config_file(self, monkeypatch, write_text):
        monkeypatch.setenv("THEMEALIGN_SEED", "7")
        path = write_text("run.env", "seed=8\n")
        assert load_config(path, {"seed": 9}).seed == 9

    def test_unset_flags_do_not_override(self, write_text):
        path = write_text("run.env", "kappa=5\n")
        assert load_config(path, {"kappa": None}).kappa == 5.0

    def test_missing_config_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_config(tmp_path / "absent.env")

    @pytest.mark.parametrize("overrides", [{"k": 1}, {"threshold": 1.5}, {"kappa": -1}, {"threads": 0}])
    def test_invalid_values(self, overrides):
        with pytest.raises(ValidationError):
            load_config(overrides=overrides)


class TestVariants:

    def test_default_is_full_model(self):
        assert load_variants()["default_variant"] == "2lda_c_hmm"
        assert PipelineConfig().variant_flags() == {"use_transitions": True, "use_concept_boost": True}

    @pytest.mark.parametrize(
        "variant, transitions, boost",
        [("2lda", False, False), ("2lda_hmm", True, False), ("2lda_c", False, True), ("2lda_c_hmm", True, True)],
    )
    def test_presets(self, variant, transitions, boost):
        flags = PipelineConfig(variant=variant).variant_flags()
        assert flags == {"use_transitions": transitions, "use_concept_boost": boost}

    def test_explicit_switch_beats_preset(self):
        flags = PipelineConfig(variant="2lda_c_hmm", use_concept_boost=False).variant_flags()
        assert flags == {"use_transitions": True, "use_concept_boost": False}

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            PipelineConfig(variant="3lda").variant_flags()


class TestHyperparameters:

    def test_wtopic_defaults_follow_the_data(self):
        hyper = PipelineConfig().resolve_wtopic_hyper(vocab_size=50000, num_paragraphs=1000)
        assert hyper.eta == pytest.approx(0.5)
        assert hyper.gamma == pytest.approx(50.0)
        assert (hyper.iterations, hyper.burn_in) == (200, 100)

    def test_wtopic_schedule_override(self):
        config = PipelineConfig(iterations=50, burn_in=10, wtopic_iterations=30, wtopic_burn_in=5)
        hyper = config.resolve_wtopic_hyper(100, 10)
        assert (hyper.iterations, hyper.burn_in) == (30, 5)

    def test_theme_defaults_follow_the_data(self):
        hyper = PipelineConfig(k=20).resolve_theme_hyper(vocab_size=20000)
        assert hyper.beta == pytest.approx(0.2)
        assert hyper.lam == pytest.approx(2.5)
        assert hyper.alpha == 0.01
        assert hyper.kappa == 1000.0

    def test_explicit_values_win(self):
        hyper = PipelineConfig(k=5, beta=0.3, lam=0.7).resolve_theme_hyper(20000)
        assert (hyper.beta, hyper.lam) == (0.3, 0.7)

    def test_variant_reaches_theme_hyper(self):
        hyper = PipelineConfig(variant="2lda").resolve_theme_hyper(100)
        assert not hyper.use_transitions
        assert not hyper.use_concept_boost
