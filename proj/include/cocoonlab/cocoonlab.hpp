#pragma once

#include "cocoonlab/bifurcation.hpp"
#include "cocoonlab/charpoly_oracle.hpp"
#include "cocoonlab/eigensolver.hpp"
#include "cocoonlab/errors.hpp"
#include "cocoonlab/matrix.hpp"
#include "cocoonlab/operator.hpp"
#include "cocoonlab/parallel.hpp"
#include "cocoonlab/spectrum.hpp"
#include "cocoonlab/sweep.hpp"
#include "cocoonlab/symmetry.hpp"
