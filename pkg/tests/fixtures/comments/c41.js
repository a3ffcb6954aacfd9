var a = 1, b = 2, c = 3, x = 1, img = ee.Image(0), s = 'z';
var s = "/* not a comment */"; /* real one */
// standalone comment 81
var c = ee.ImageCollection('C').filter(ee.Filter.eq('k', '/*v*/')).first();
// standalone comment 56
var m = s.replace(/\/\//g, '/'); // escaped slashes

print(typeof /x/.source); // regex after keyword
// standalone comment 7

var n = ee.Number(4) // comment between
  .sqrt();
// standalone comment 0
print(typeof /x/.source); // regex after keyword
var c = ee.ImageCollection('C').filter(ee.Filter.eq('k', '/*v*/')).first();
// standalone comment 73
