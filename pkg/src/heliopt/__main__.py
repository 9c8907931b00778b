import sys

from heliopt.cli import main

sys.exit(main())
