import sys

from predicativize.cli import main

sys.exit(main())
