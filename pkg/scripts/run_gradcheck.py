import subprocess
import sys

import shared


def main():
    shared.configure_python_path()
    subprocess.check_call(
        [sys.executable, "-m", "loster", "gradcheck"] + sys.argv[1:],
        env=shared.single_threaded_env(),
    )


if __name__ == "__main__":
    main()
