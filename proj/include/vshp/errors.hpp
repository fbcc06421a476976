#pragma once

#include <stdexcept>
#include <string>

namespace vshp {

// Base type for every domain failure raised by the toolkit. Specific
// subclasses exist so tests and callers can discriminate without parsing
// message text.
struct SimError : std::runtime_error {
  explicit SimError(const std::string& msg) : std::runtime_error(msg) {}
};

#define VSHP_DEFINE_ERROR(NAME)                                  \
  struct NAME : SimError {                                        \
    explicit NAME(const std::string& msg) : SimError(msg) {}      \
  }

VSHP_DEFINE_ERROR(ZeroImpedanceBranch);
VSHP_DEFINE_ERROR(DuplicateBranchIds);
VSHP_DEFINE_ERROR(SingularNetwork);
VSHP_DEFINE_ERROR(LowVoltageRegion);
VSHP_DEFINE_ERROR(NoLoadAtBus);
VSHP_DEFINE_ERROR(PowerFlowDiverged);
VSHP_DEFINE_ERROR(GuideVaneClosedWithFlow);
VSHP_DEFINE_ERROR(LowVoltagePLL);
VSHP_DEFINE_ERROR(LowVoltageDivision);
VSHP_DEFINE_ERROR(DegenerateImpedance);
VSHP_DEFINE_ERROR(ConfigInvalid);
VSHP_DEFINE_ERROR(SchemaError);
VSHP_DEFINE_ERROR(EquilibriumDiverged);
VSHP_DEFINE_ERROR(StepDiverged);
VSHP_DEFINE_ERROR(NonEquilibriumPoint);
VSHP_DEFINE_ERROR(EigenFailed);
VSHP_DEFINE_ERROR(ModeMatchAmbiguous);

#undef VSHP_DEFINE_ERROR

}  // namespace vshp
