import sys

from qoct.cli import main

sys.exit(main())
