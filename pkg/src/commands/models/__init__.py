from .run import InputFormat, RunConfig, Seeds, load_run_config

__all__ = ["InputFormat", "RunConfig", "Seeds", "load_run_config"]
