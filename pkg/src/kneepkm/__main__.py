from kneepkm.cli import main

main()
