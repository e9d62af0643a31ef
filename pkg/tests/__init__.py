# Tests package for SupplyChainRescue AI
