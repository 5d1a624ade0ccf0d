const { fetchUser } = require('./api');

class UserCard {
  constructor(id) {
    this.id = id;
  }

  async load() {
    // fetchUser(this.id) is cached elsewhere
    this.user = await fetchUser(this.id);
    return this.user;
  }

  render() {
    const name = this.user ? this.user.name : 'fetchUser(pending)';
    return `<div>${name}</div>`;
  }
}

const format = function (user) {
  return user.name.toUpperCase();
};

module.exports = { UserCard, format };
