#pragma once

#include "failsafe/errors.hpp"
#include "failsafe/field.hpp"
#include "failsafe/poly.hpp"
#include "failsafe/poly_matrix.hpp"
#include "failsafe/graph.hpp"
#include "failsafe/algebraic_dso.hpp"
#include "failsafe/consistent_spt.hpp"
#include "failsafe/full_dso.hpp"
