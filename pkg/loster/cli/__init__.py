from .app import build_parser, main, run
from .config_file import ResolvedConfig, read_config_file, resolve_configs
from .gradcheck import build_instance, gradcheck_command, loss_builders, run_gradcheck
from .manifest import RunManifest
