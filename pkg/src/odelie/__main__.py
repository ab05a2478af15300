from odelie.cli import main

raise SystemExit(main())
