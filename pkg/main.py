# dualbell – dual Bell-CHSH entanglement toolkit
#
# Process entry point: loads .env, then hands over to the CLI dispatcher.
#   python main.py classify fixture:bell_phi_minus
#   python main.py simulate --shots 1000000 --calibrate 2.573

import sys
from pathlib import Path

from dotenv import load_dotenv

load_dotenv(Path(__file__).resolve().parent / ".env")

from app.main import main  # noqa: E402


if __name__ == "__main__":
    try:
        sys.exit(main())
    except Exception as e:
        print(f"[dualbell] FATAL: {e}", file=sys.stderr, flush=True)
        import traceback
        traceback.print_exc()
        sys.exit(1)
