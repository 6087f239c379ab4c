import sys

from weakthermo.cli import main

sys.exit(main())
