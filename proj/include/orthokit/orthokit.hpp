#pragma once

#include "orthokit/common.hpp"
#include "orthokit/lp.hpp"
#include "orthokit/testspace.hpp"
#include "orthokit/states.hpp"
#include "orthokit/morphism.hpp"
#include "orthokit/logic.hpp"
#include "orthokit/coarsening.hpp"
#include "orthokit/compound.hpp"
#include "orthokit/interference.hpp"
#include "orthokit/quantum.hpp"
#include "orthokit/corpus.hpp"
#include "orthokit/document.hpp"
