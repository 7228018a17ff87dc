import sys

from ecplan.cli import main

sys.exit(main())
