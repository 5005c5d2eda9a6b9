"""Pipeline configuration"""

from .settings import PipelineConfig, load_config, load_variants

__all__ = ["PipelineConfig", "load_config", "load_variants"]
