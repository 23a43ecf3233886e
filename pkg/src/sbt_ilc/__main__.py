import sys

from sbt_ilc.cli import main

sys.exit(main())
