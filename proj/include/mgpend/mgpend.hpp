#ifndef MGPEND_MGPEND_HPP
#define MGPEND_MGPEND_HPP

#include "mgpend/budget.hpp"
#include "mgpend/cavity.hpp"
#include "mgpend/config.hpp"
#include "mgpend/formats.hpp"
#include "mgpend/requirements.hpp"
#include "mgpend/ringdown.hpp"
#include "mgpend/suspension.hpp"
#include "mgpend/svg.hpp"
#include "mgpend/units.hpp"

#endif
