import sys

from ceplan.planner.planner import main

sys.exit(main())
