"""Config tree serialization and live patching."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lidarpipe import FunctionEntry, PatchError, PipelineConfig, apply_config_patch
from lidarpipe.engine import build_default_registry, default_config


def sample_config() -> PipelineConfig:
    config = PipelineConfig()
    config.data.main_dir = "/data/run42"
    config.data.pcd_type = ".pcd"
    config.data.replay_hz = 12.5
    config.proc["lidar"] = [
        FunctionEntry("crop", enabled=True, priority=2,
                      params={"min_x": -1.0, "max_x": 1.0, "table": [[1, 2], [3, 4]]}),
        FunctionEntry("rotate", enabled=False, priority=1, params={"yaw": 0.5}),
    ]
    config.proc["post"] = [FunctionEntry("export", enabled=True, priority=7, params={"out_dir": "o"})]
    config.visualization["point_size"] = 3.5
    return config


class TestSerialization:
    def test_yaml_roundtrip_is_identity(self):
        config = sample_config()
        again = PipelineConfig.from_yaml(config.to_yaml())
        assert again.to_dict() == config.to_dict()

    def test_default_config_roundtrip(self):
        config = default_config(build_default_registry())
        again = PipelineConfig.from_yaml(config.to_yaml())
        assert again.to_dict() == config.to_dict()

    def test_roundtrip_preserves_entry_order(self):
        config = sample_config()
        again = PipelineConfig.from_yaml(config.to_yaml())
        assert [e.name for e in again.proc["lidar"]] == ["crop", "rotate"]

    def test_unknown_category_rejected(self):
        with pytest.raises(Exception, match="bogus"):
            PipelineConfig.from_dict({"proc": {"bogus": {}}})

    def test_duplicate_names_rejected(self):
        with pytest.raises(Exception, match="duplicate"):
            PipelineConfig(proc={"lidar": [FunctionEntry("a"), FunctionEntry("a")]})


class TestPatch:
    def test_toggle_enabled(self):
        config = sample_config()
        new = apply_config_patch(config, "proc.lidar.crop.enabled", False)
        assert new.find("lidar", "crop").enabled is False
        assert config.find("lidar", "crop").enabled is True  # original untouched

    def test_priority_patch(self):
        new = apply_config_patch(sample_config(), "proc.lidar.crop.priority", 0)
        assert new.find("lidar", "crop").priority == 0

    def test_wrong_type_rejected_config_unchanged(self):
        config = sample_config()
        before = config.to_dict()
        with pytest.raises(PatchError, match="expected int"):
            apply_config_patch(config, "proc.lidar.crop.priority", "high")
        assert config.to_dict() == before

    def test_unknown_path_rejected(self):
        with pytest.raises(PatchError, match="no function"):
            apply_config_patch(sample_config(), "proc.lidar.nope.enabled", True)
        with pytest.raises(PatchError, match="unknown config path"):
            apply_config_patch(sample_config(), "nonsense.x", 1)

    def test_unknown_param_rejected(self):
        with pytest.raises(PatchError, match="no parameter"):
            apply_config_patch(sample_config(), "proc.lidar.crop.bogus", 1.0)

    def test_data_patch(self):
        new = apply_config_patch(sample_config(), "data.replay_hz", 30.0)
        assert new.data.replay_hz == 30.0

    def test_visualization_patch(self):
        new = apply_config_patch(sample_config(), "visualization.point_size", 5.0)
        assert new.visualization["point_size"] == 5.0

    def test_float_param_accepts_int(self):
        new = apply_config_patch(sample_config(), "proc.lidar.crop.min_x", -3)
        assert new.find("lidar", "crop").params["min_x"] == -3.0

    def test_bool_is_not_int(self):
        with pytest.raises(PatchError):
            apply_config_patch(sample_config(), "proc.lidar.crop.priority", True)


class TestPatchWithSchema:
    def setup_method(self):
        self.registry = build_default_registry()
        self.config = default_config(self.registry)

    def test_out_of_range_rejected(self):
        with pytest.raises(PatchError, match="below minimum"):
            apply_config_patch(
                self.config, "proc.lidar.dbscan.eps", -1.0, schema=self.registry
            )

    def test_above_maximum_rejected(self):
        with pytest.raises(PatchError, match="above maximum"):
            apply_config_patch(
                self.config, "proc.lidar.bg_filter_stdf.threshold", 1.5, schema=self.registry
            )

    def test_cross_param_validation(self):
        with pytest.raises(PatchError, match="min_x exceeds max_x"):
            apply_config_patch(
                self.config, "proc.lidar.crop.max_x", -1000.0, schema=self.registry
            )

    def test_valid_patch_passes_schema(self):
        new = apply_config_patch(
            self.config, "proc.lidar.dbscan.eps", 1.5, schema=self.registry
        )
        assert new.find("lidar", "dbscan").params["eps"] == 1.5


@settings(max_examples=50, deadline=None)
@given(
    st.sampled_from([
        ("proc.lidar.crop.enabled", st.booleans()),
        ("proc.lidar.crop.priority", st.integers(-100, 100)),
        ("proc.lidar.crop.min_x", st.floats(-50, 50, allow_nan=False)),
        ("data.replay_hz", st.floats(0.1, 100, allow_nan=False)),
    ]).flatmap(lambda pv: st.tuples(st.just(pv[0]), pv[1]))
)
def test_patch_never_corrupts(path_value):
    path, value = path_value
    config = sample_config()
    before = config.to_dict()
    new = apply_config_patch(config, path, value)
    # Original untouched, result still serializes losslessly.
    assert config.to_dict() == before
    assert PipelineConfig.from_yaml(new.to_yaml()).to_dict() == new.to_dict()
