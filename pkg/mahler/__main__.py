import sys

from mahler.cli import main

sys.exit(main())
