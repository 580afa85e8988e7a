import sys
from invoke import run, task
from python_boilerplate.tasks import *


@task
def configure(ctx):
    """
    Install the package with its development extras.
    """

    run("%s -m pip install .[dev] -r requirements.txt" % sys.executable)


@task
def samples(ctx):
    """
    Run the CLI over the bundled sample documents.
    """

    for args in [
        "parse samples/example.grw",
        "match samples/example.grw --graph G",
        "step samples/example.grw --graph G --mode max",
        "aut samples/automorphisms.grw --graph H_par",
        "life --pattern blinker --steps 2 --verify",
    ]:
        run("%s -m parallel_rewrite %s" % (sys.executable, args), warn=True)
