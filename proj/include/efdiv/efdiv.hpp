#pragma once

#include "efdiv/bayes.hpp"
#include "efdiv/chernoff.hpp"
#include "efdiv/divergences.hpp"
#include "efdiv/families.hpp"
#include "efdiv/family.hpp"
#include "efdiv/oracle.hpp"
#include "efdiv/sampling.hpp"
#include "efdiv/special.hpp"
