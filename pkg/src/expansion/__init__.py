from src.expansion.chain import EnvironmentChain
from src.expansion.check import check_expansion, closed_fraction, closure_tail
from src.expansion.numeric import expand_numeric
from src.expansion.symbolic import expand_symbolic_zoo, symbolic_chain
