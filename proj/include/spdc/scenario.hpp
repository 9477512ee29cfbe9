#pragma once

#include <string>
#include <vector>

#include "spdc/cavity.hpp"
#include "spdc/config.hpp"
#include "spdc/correlation.hpp"
#include "spdc/dispersion.hpp"
#include "spdc/montecarlo.hpp"
#include "spdc/spectral.hpp"

namespace spdc {

// Builders mapping validated config slices onto module inputs. Public so the
// CLI verbs and tests can assemble partial pipelines without a scenario run.
CavityModel make_cavity(const SourceSetup& src);
PhaseMatchingEnvelope make_envelope(const SourceSetup& src);
DispersionModel make_dispersion(const SourceSetup& src);
double pump_frequency_hz(const SourceSetup& src);
FilterCavity make_filter(const FilterSetup& filter, double center_hz);
ClusterSpectrum make_joint_spectrum(const ScenarioConfig& cfg);

// Correlation inputs for the given mode set. The transit-time difference
// comes from the dispersion model at the two branch centers; the weight
// floor is lifted so filter leakage modes stay in the sum.
CorrelationConfig make_correlation_config(const ScenarioConfig& cfg,
                                          ClusterSpectrum spectrum);

// Source and detection chains at the given pump power. An enabled filter
// multiplies the signal arm by its transmission budget (peak x long-term
// drift) times the ensemble pass fraction of the resonant modes, and scales
// the configured signal background, a detected rate measured without the
// etalon, by the etalon's broadband mean transmission.
SimulationConfig make_simulation_config(const ScenarioConfig& cfg,
                                        const ClusterSpectrum& unfiltered,
                                        double pump_power_mw);

struct ScenarioArtifacts {
  std::vector<std::string> files;  // paths written; the report comes last
};

// Runs the preset's pipeline and writes its file bundle into cfg.output_dir.
ScenarioArtifacts run_scenario(const ScenarioConfig& cfg);

}  // namespace spdc
