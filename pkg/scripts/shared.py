import os
import pathlib

ROOT = pathlib.Path(__file__).parent.parent
TESTS = ROOT / "tests"


def configure_python_path():
    python_path = os.getenv("PYTHONPATH")

    if python_path is None:
        os.environ["PYTHONPATH"] = str(ROOT)
    else:
        os.environ["PYTHONPATH"] += os.pathsep + str(ROOT)
    print("Configure python path: ", os.getenv("PYTHONPATH"))


def single_threaded_env():
    """Environment with one linear-algebra thread, for reproducible runs"""
    env = dict(os.environ)
    for variable in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        env[variable] = "1"
    return env
