from fullnn.cli import main

raise SystemExit(main())
