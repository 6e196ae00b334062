import sys

from recbound.cli import main

sys.exit(main())
