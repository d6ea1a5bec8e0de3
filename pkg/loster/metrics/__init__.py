from .clustering import ContingencyTable, contingency, evaluate, nmi, rand_index
