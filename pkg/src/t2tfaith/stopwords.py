"""Fixed English stop-word list used by filtered sub-sequence matching.

The list is part of the matching definition: changing it changes alignment
results, so any edit must bump ``STOPWORDS_VERSION``.  Entries are case-folded.
"""

STOPWORDS_VERSION = "1"

_WORDS = """
a an the
about above across after against along among around as at before behind below
beneath beside besides between beyond by down during except for from in inside
into near of off on onto out outside over past since through throughout till to
toward towards under underneath until up upon via with within without
and but or nor so yet either neither both whether
if than that though although because while whereas unless
am is are was were be been being have has had having do does did doing
will would shall should can could may might must
i me my mine myself you your yours yourself yourselves he him his himself
she her hers herself it its itself we us our ours ourselves they them their
theirs themselves
this these those what which who whom whose when where why how
all any each every few more most other some such no not only own same too very
just also then there here once again further
's ’s
"""

STOPWORDS = frozenset(_WORDS.split())
