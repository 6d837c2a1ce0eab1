#pragma once

#include "analysis.hpp"
#include "closed_form.hpp"
#include "core.hpp"
#include "implicit_model.hpp"
#include "material_law.hpp"
#include "model_io.hpp"
#include "principal_curves.hpp"
