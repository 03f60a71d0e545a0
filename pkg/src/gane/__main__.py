import sys

from .runkit.cli import main

sys.exit(main())
