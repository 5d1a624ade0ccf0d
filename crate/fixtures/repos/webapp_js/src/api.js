'use strict';

const BASE = '/api';

function fetchUser(id) {
  return request(`${BASE}/users/${id}`);
}

const request = async (url) => {
  const res = await fetch(url);
  if (!res.ok) {
    throw new ApiError(res.status);
  }
  return res.json();
};

class ApiError extends Error {
  constructor(status) {
    super(`request failed: ${status}`);
    this.status = status;
  }
}

module.exports = { fetchUser, request, ApiError };
