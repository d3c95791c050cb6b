#pragma once

#include <invsrc/experiments.hpp>
#include <invsrc/rng.hpp>

#include <memory>

namespace testutil {

inline std::shared_ptr<const invsrc::ForwardContext> benchmark_context(int level) {
  const invsrc::MeshPtr mesh = invsrc::build_uniform_mesh(level);
  return std::make_shared<const invsrc::ForwardContext>(
      invsrc::make_context(mesh, invsrc::example_diffusion(mesh)));
}

inline std::shared_ptr<const invsrc::ForwardContext> identity_context(int level) {
  const invsrc::MeshPtr mesh = invsrc::build_uniform_mesh(level);
  return std::make_shared<const invsrc::ForwardContext>(
      invsrc::make_context(mesh, invsrc::identity_diffusion(mesh)));
}

inline invsrc::NodalField random_field(const invsrc::MeshPtr& mesh, invsrc::UniformPm1& rng) {
  invsrc::NodalField f = invsrc::zero_field(mesh);
  for (int i = 0; i < mesh->n_nodes(); ++i) f.values[i] = rng.next();
  return f;
}

}  // namespace testutil
