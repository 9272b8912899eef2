#pragma once

#include <json.hpp>

#include "binchoice/bounds.hpp"
#include "binchoice/core.hpp"
#include "binchoice/parametric.hpp"
#include "binchoice/rationalize.hpp"
#include "binchoice/shape.hpp"
#include "binchoice/simulate.hpp"
#include "binchoice/srp.hpp"

/// JSON views of the analysis results. Keys are emitted in sorted order, so
/// equal inputs give byte-identical documents.
namespace binchoice::report {

using Json = nlohmann::json;

Json to_json(const BudgetSet& budget);
Json to_json(const IncomeNumeraire& point);

/// Cell coordinates are resolved against `grid` so the report is readable
/// without the index layout.
Json to_json(const ShapeReport& report, const ChoiceProbGrid& grid);

Json to_json(const VerificationReport& report);
Json to_json(const IndexModel& model);
Json to_json(const RationalizabilityVerdict& verdict);
Json to_json(const FitResult& fit);
Json to_json(const DemandBounds& bounds);
Json to_json(const CvInterval& interval);
Json to_json(const TwoBudgetCase& c, const SrpSolution& solution);
Json to_json(const SpecValidation& validation);

/// Error entry used for failed groups and failed runs.
Json error_json(ErrorCode code, const std::string& message);

}  // namespace binchoice::report
