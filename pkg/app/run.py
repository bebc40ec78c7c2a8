import sys

from dotenv import load_dotenv

# Load environment variables from .env, overriding any existing ones
load_dotenv(override=True)


def start():
    """Entry point of the `tzsim` console script."""
    from app.main import main

    sys.exit(main())
