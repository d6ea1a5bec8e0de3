import os
import sys

THREAD_VARIABLES = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def _early_thread_limit(argv):
    # BLAS reads these variables when numpy is first imported
    for index, arg in enumerate(argv):
        value = None
        if arg == "--threads" and index + 1 < len(argv):
            value = argv[index + 1]
        elif arg.startswith("--threads="):
            value = arg.split("=", 1)[1]
        if value is not None and value.isdigit():
            for variable in THREAD_VARIABLES:
                os.environ[variable] = value


_early_thread_limit(sys.argv[1:])

from loster.cli import main  # noqa: E402

main()
